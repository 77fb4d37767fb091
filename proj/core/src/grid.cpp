#include "tdhf/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace tdhf {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

}  // namespace

Grid::~Grid() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

std::array<double, 3> Grid::node_coordinates(std::size_t flat) const {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = dim_ - 1; a >= 0; --a) {
        x[a] = x_axis_[flat % n_];
        flat /= n_;
    }
    return x;
}

void Grid::fft_raw(const Complex* in, Complex* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_),
                     reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void Grid::ifft_raw(const Complex* in, Complex* out) const {
    fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_),
                     reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

GridPtr make_grid(int dim, int points_per_axis, double box_length) {
    if (dim < 1 || dim > 3)
        throw std::invalid_argument("make_grid: dim must be 1, 2 or 3");
    if (!is_power_of_two(points_per_axis) || points_per_axis < 8)
        throw std::invalid_argument(
            "make_grid: points_per_axis must be a power of two >= 8");
    if (!(box_length > 0.0) || !std::isfinite(box_length))
        throw std::invalid_argument("make_grid: box_length must be positive");

    auto g = std::shared_ptr<Grid>(new Grid());
    const int n = points_per_axis;
    g->dim_ = dim;
    g->n_ = n;
    g->length_ = box_length;
    g->spacing_ = box_length / n;
    g->cell_volume_ = std::pow(g->spacing_, dim);
    g->node_count_ = 1;
    for (int a = 0; a < dim; ++a) g->node_count_ *= n;

    g->x_axis_.resize(n);
    g->k_axis_.resize(n);
    const double dk = 2.0 * M_PI / box_length;
    for (int i = 0; i < n; ++i) {
        g->x_axis_[i] = -0.5 * box_length + i * g->spacing_;
        g->k_axis_[i] = dk * (i < n / 2 ? i : i - n);
    }

    g->k_squared_.assign(g->node_count_, 0.0);
    {
        std::size_t stride = g->node_count_;
        for (int a = 0; a < dim; ++a) {
            stride /= n;
            for (std::size_t idx = 0; idx < g->node_count_; ++idx) {
                const int mode = static_cast<int>((idx / stride) % n);
                g->k_squared_[idx] += g->k_axis_[mode] * g->k_axis_[mode];
            }
        }
    }
    g->k_squared_half_.resize(g->node_count_);
    g->k_abs_over_sqrt2_.resize(g->node_count_);
    for (std::size_t i = 0; i < g->node_count_; ++i) {
        g->k_squared_half_[i] = 0.5 * g->k_squared_[i];
        g->k_abs_over_sqrt2_[i] = std::sqrt(g->k_squared_half_[i]);
    }

    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        std::vector<Complex> scratch_in(g->node_count_), scratch_out(g->node_count_);
        int dims[3] = {n, n, n};
        g->plan_fwd_ = fftw_plan_dft(
            dim, dims, reinterpret_cast<fftw_complex*>(scratch_in.data()),
            reinterpret_cast<fftw_complex*>(scratch_out.data()), FFTW_FORWARD,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        g->plan_bwd_ = fftw_plan_dft(
            dim, dims, reinterpret_cast<fftw_complex*>(scratch_in.data()),
            reinterpret_cast<fftw_complex*>(scratch_out.data()), FFTW_BACKWARD,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
    }

    if (dim == 3) {
        g->interaction_mult_.resize(g->node_count_);
        for (std::size_t i = 0; i < g->node_count_; ++i)
            g->interaction_mult_[i] =
                g->k_squared_[i] > 0.0 ? 1.0 / g->k_squared_[i] : 0.0;
    } else {
        // Sample the soft kernel on the displacement lattice (min-image) and
        // take its exact discrete Fourier symbol. Kept with its finite zero
        // mode: the sampled kernel stays pointwise positive, which carries the
        // Schwarz positivity of the potential energy over to the grid.
        const double soft_a = 1.0;
        std::vector<Complex> w(g->node_count_);
        for (std::size_t idx = 0; idx < g->node_count_; ++idx) {
            std::size_t rem = idx;
            double r2 = 0.0;
            for (int a = dim - 1; a >= 0; --a) {
                double d = g->spacing_ * static_cast<double>(rem % n);
                if (d > 0.5 * box_length) d -= box_length;
                r2 += d * d;
                rem /= n;
            }
            w[idx] = 1.0 / std::sqrt(r2 + soft_a * soft_a);
        }
        std::vector<Complex> wk(g->node_count_);
        g->fft_raw(w.data(), wk.data());
        g->interaction_mult_.resize(g->node_count_);
        const double scale = g->cell_volume_ / (4.0 * M_PI);
        for (std::size_t i = 0; i < g->node_count_; ++i)
            g->interaction_mult_[i] = scale * wk[i].real();
    }
    return g;
}

ScalarField make_field(GridPtr grid) {
    return ScalarField{grid, std::vector<Complex>(grid->node_count())};
}

namespace {

void check_grid(const GridPtr& a, const GridPtr& b) {
    if (a.get() != b.get())
        throw std::invalid_argument("fields live on different grids");
}

}  // namespace

SpectralField transform_forward(const ScalarField& f) {
    SpectralField out{f.grid, std::vector<Complex>(f.v.size())};
    f.grid->fft_raw(f.v.data(), out.c.data());
    const double s = 1.0 / std::sqrt(static_cast<double>(f.grid->node_count()));
    for (auto& c : out.c) c *= s;
    return out;
}

ScalarField transform_inverse(const SpectralField& f) {
    ScalarField out{f.grid, std::vector<Complex>(f.c.size())};
    f.grid->ifft_raw(f.c.data(), out.v.data());
    const double s = 1.0 / std::sqrt(static_cast<double>(f.grid->node_count()));
    for (auto& v : out.v) v *= s;
    return out;
}

ScalarField apply_multiplier(const ScalarField& f, const SpectralMultiplier& mult) {
    check_grid(f.grid, mult.grid);
    const std::size_t nn = f.v.size();
    std::vector<Complex> work(nn);
    f.grid->fft_raw(f.v.data(), work.data());
    for (std::size_t i = 0; i < nn; ++i) work[i] *= mult.m[i];
    ScalarField out{f.grid, std::vector<Complex>(nn)};
    f.grid->ifft_raw(work.data(), out.v.data());
    const double s = 1.0 / static_cast<double>(nn);
    for (auto& v : out.v) v *= s;
    return out;
}

ScalarField kinetic_phase(const ScalarField& f, double t) {
    const std::size_t nn = f.v.size();
    const auto& sym = f.grid->kinetic_symbol();
    std::vector<Complex> work(nn);
    f.grid->fft_raw(f.v.data(), work.data());
    for (std::size_t i = 0; i < nn; ++i) {
        const double phase = -sym[i] * t;
        work[i] *= Complex(std::cos(phase), std::sin(phase));
    }
    ScalarField out{f.grid, std::vector<Complex>(nn)};
    f.grid->ifft_raw(work.data(), out.v.data());
    const double s = 1.0 / static_cast<double>(nn);
    for (auto& v : out.v) v *= s;
    return out;
}

ScalarField coulomb_solve(const ScalarField& source) {
    const auto& sym = source.grid->interaction_symbol();
    const std::size_t nn = source.v.size();
    std::vector<Complex> work(nn);
    source.grid->fft_raw(source.v.data(), work.data());
    for (std::size_t i = 0; i < nn; ++i) work[i] *= sym[i];
    ScalarField out{source.grid, std::vector<Complex>(nn)};
    source.grid->ifft_raw(work.data(), out.v.data());
    const double s = 1.0 / static_cast<double>(nn);
    for (auto& v : out.v) v *= s;
    return out;
}

SpectralMultiplier kinetic_multiplier(GridPtr grid) {
    return SpectralMultiplier{grid, grid->kinetic_symbol()};
}

SpectralMultiplier half_kinetic_multiplier(GridPtr grid) {
    return SpectralMultiplier{grid, grid->half_kinetic_symbol()};
}

Complex inner_product(const ScalarField& f, const ScalarField& g) {
    check_grid(f.grid, g.grid);
    Complex acc(0.0, 0.0);
    for (std::size_t i = 0; i < f.v.size(); ++i) acc += std::conj(f.v[i]) * g.v[i];
    return acc * f.grid->cell_volume();
}

double norm_l2(const ScalarField& f) {
    double acc = 0.0;
    for (const auto& v : f.v) acc += std::norm(v);
    return std::sqrt(acc * f.grid->cell_volume());
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    check_grid(a.grid, b.grid);
    ScalarField out{a.grid, a.v};
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += b.v[i];
    return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    check_grid(a.grid, b.grid);
    ScalarField out{a.grid, a.v};
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= b.v[i];
    return out;
}

ScalarField operator*(Complex s, const ScalarField& f) {
    ScalarField out{f.grid, f.v};
    for (auto& v : out.v) v *= s;
    return out;
}

void axpy(Complex a, const ScalarField& x, ScalarField& y) {
    check_grid(x.grid, y.grid);
    for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
}

double gradient_norm_sq(const ScalarField& f) {
    const std::size_t nn = f.v.size();
    std::vector<Complex> work(nn);
    f.grid->fft_raw(f.v.data(), work.data());
    const auto& k2 = f.grid->k_squared();
    double acc = 0.0;
    for (std::size_t i = 0; i < nn; ++i) acc += k2[i] * std::norm(work[i]);
    return acc * f.grid->cell_volume() / static_cast<double>(nn);
}

bool all_finite(const ScalarField& f) {
    for (const auto& v : f.v)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

}  // namespace tdhf
