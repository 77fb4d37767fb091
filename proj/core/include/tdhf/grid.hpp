#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace tdhf {

using Complex = std::complex<double>;

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Periodic cubic box [-L/2, L/2)^d sampled on a uniform lattice, with the
/// spectral machinery used by every operator in this library: wavevectors,
/// the kinetic symbols |k|^2/2 and |k|/sqrt(2), and the interaction-kernel
/// multiplier (1/|k|^2 with a neutralizing background in 3D, the sampled
/// soft kernel 1/sqrt(r^2+1) scaled by 1/4pi in lower dimensions).
///
/// Units: hbar = m = 1. Node order is row-major, last axis fastest, matching
/// the FFT layout and the snapshot file format.
class Grid {
public:
    ~Grid();
    Grid(const Grid&) = delete;
    Grid& operator=(const Grid&) = delete;

    int dim() const { return dim_; }
    int points_per_axis() const { return n_; }
    double box_length() const { return length_; }
    double spacing() const { return spacing_; }
    double cell_volume() const { return cell_volume_; }
    std::size_t node_count() const { return node_count_; }

    /// Coordinate of a node along one axis (0 <= i < points_per_axis).
    double coordinate(int axis_index) const { return x_axis_[axis_index]; }
    /// Full coordinate of a flat node index; unused axes are 0.
    std::array<double, 3> node_coordinates(std::size_t flat) const;
    /// Wavevector component for a per-axis mode index.
    double wavevector(int mode_index) const { return k_axis_[mode_index]; }

    const std::vector<double>& kinetic_symbol() const { return k_squared_half_; }
    const std::vector<double>& half_kinetic_symbol() const { return k_abs_over_sqrt2_; }
    const std::vector<double>& interaction_symbol() const { return interaction_mult_; }
    const std::vector<double>& k_squared() const { return k_squared_; }

    // Raw in-place-convention transforms used by the free functions below.
    void fft_raw(const Complex* in, Complex* out) const;
    void ifft_raw(const Complex* in, Complex* out) const;

private:
    Grid() = default;
    friend GridPtr make_grid(int, int, double);

    int dim_ = 0;
    int n_ = 0;
    double length_ = 0.0;
    double spacing_ = 0.0;
    double cell_volume_ = 0.0;
    std::size_t node_count_ = 0;
    std::vector<double> x_axis_;
    std::vector<double> k_axis_;
    std::vector<double> k_squared_;
    std::vector<double> k_squared_half_;
    std::vector<double> k_abs_over_sqrt2_;
    std::vector<double> interaction_mult_;
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
};

/// dim in {1,2,3}; points_per_axis a power of two >= 8; box_length > 0.
GridPtr make_grid(int dim, int points_per_axis, double box_length);

/// Complex-valued function sampled on grid nodes. Real-valued quantities are
/// stored with vanishing imaginary part.
struct ScalarField {
    GridPtr grid;
    std::vector<Complex> v;
};

/// Coefficients in the unitary discrete Fourier basis (Parseval-exact).
struct SpectralField {
    GridPtr grid;
    std::vector<Complex> c;
};

/// Real symbol per Fourier mode; symmetric under k -> -k for real operators.
struct SpectralMultiplier {
    GridPtr grid;
    std::vector<double> m;
};

ScalarField make_field(GridPtr grid);

SpectralField transform_forward(const ScalarField& f);
ScalarField transform_inverse(const SpectralField& f);

/// Pointwise multiplication by the symbol in Fourier space.
ScalarField apply_multiplier(const ScalarField& f, const SpectralMultiplier& mult);

/// Free flow over time t (either sign): multiplies mode k by e^{-i |k|^2 t / 2}.
ScalarField kinetic_phase(const ScalarField& f, double t);

/// Interaction potential of a source: in 3D the zero-mean periodic solution of
/// -lap u = source - mean(source) (Newtonian normalization, u = source * 1/(4pi r));
/// in 1D/2D the 1/4pi-scaled convolution with the sampled soft kernel.
ScalarField coulomb_solve(const ScalarField& source);

SpectralMultiplier kinetic_multiplier(GridPtr grid);
SpectralMultiplier half_kinetic_multiplier(GridPtr grid);

/// Quadrature inner product <f,g> = dV sum conj(f) g (conjugate-linear in f).
Complex inner_product(const ScalarField& f, const ScalarField& g);
double norm_l2(const ScalarField& f);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(Complex s, const ScalarField& f);
void axpy(Complex a, const ScalarField& x, ScalarField& y);

/// L2-gradient norm squared ||grad f||^2, evaluated spectrally.
double gradient_norm_sq(const ScalarField& f);

bool all_finite(const ScalarField& f);

}  // namespace tdhf
