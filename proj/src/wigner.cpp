#include "kfs/wigner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <thread>

#include "kfs/errors.hpp"

namespace kfs {

void PhaseSpaceGrid::validate() const {
    if (!(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(p_min) && std::isfinite(p_max))) {
        throw ConfigError("phase-space grid bounds must be finite");
    }
    if (!(x_min < x_max) || !(p_min < p_max)) throw ConfigError("phase-space grid bounds must be ordered");
    if (nx < 16 || np < 16) throw ConfigError("phase-space grid needs at least 16 samples per axis");
}

PhaseSpaceGrid PhaseSpaceGrid::refined() const {
    PhaseSpaceGrid g = *this;
    g.nx *= 2;
    g.np *= 2;
    return g;
}

double WignerField::integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * quadrature_weight;
}

WignerEvaluator::WignerEvaluator(const DensityMatrix& rho) : dim_(rho.dim()) {
    const int dim = dim_;
    const std::size_t total = static_cast<std::size_t>(dim) * (dim + 1) / 2;
    offset_.resize(dim);
    cos_coef_.resize(total);
    sin_coef_.resize(total);
    rec_a_.resize(total);
    rec_x_.resize(total);
    rec_b_.resize(total);
    half_lgamma_.resize(dim);

    double residue = 0.0;
    std::size_t k = 0;
    for (int d = 0; d < dim; ++d) {
        offset_[d] = k;
        half_lgamma_[d] = 0.5 * std::lgamma(d + 1.0);
        for (int n = 0; n + d < dim; ++n, ++k) {
            const double sign = (n % 2 == 0) ? 1.0 : -1.0;
            const cplx up = rho(n, n + d);
            const cplx lo = rho(n + d, n);
            if (d == 0) {
                cos_coef_[k] = sign * up.real();
                sin_coef_[k] = 0.0;
                residue += std::abs(up.imag());
            } else {
                cos_coef_[k] = sign * (up.real() + lo.real());
                sin_coef_[k] = sign * (lo.imag() - up.imag());
                residue += std::abs(up - std::conj(lo));
            }
            const double nn = n;
            const double norm = 1.0 / std::sqrt((nn + 1.0) * (nn + 1.0 + d));
            rec_a_[k] = (2.0 * nn + 1.0 + d) * norm;
            rec_x_[k] = norm;
            rec_b_[k] = std::sqrt(nn * (nn + d)) * norm;
        }
    }
    imag_residue_ = residue * 2.0 / std::numbers::pi;
}

kernels::WignerTables WignerEvaluator::tables() const {
    kernels::WignerTables t;
    t.dim = dim_;
    t.offset = offset_.data();
    t.cos_coef = cos_coef_.data();
    t.sin_coef = sin_coef_.data();
    t.rec_a = rec_a_.data();
    t.rec_x = rec_x_.data();
    t.rec_b = rec_b_.data();
    t.half_lgamma = half_lgamma_.data();
    return t;
}

void WignerEvaluator::evaluate(std::span<const double> x, std::span<const double> p, std::span<double> out,
                               const kernels::KernelTable& table) const {
    if (x.size() != p.size() || out.size() != x.size()) throw DimensionError("WignerEvaluator: span size mismatch");
    const kernels::WignerTables t = tables();
    table.wigner(t, x.data(), p.data(), out.data(), x.size());
}

double WignerEvaluator::operator()(cplx alpha) const {
    const double x = alpha.real();
    const double p = alpha.imag();
    double out = 0.0;
    evaluate({&x, 1}, {&p, 1}, {&out, 1});
    return out;
}

double wigner_at(const DensityMatrix& rho, cplx alpha) { return WignerEvaluator(rho)(alpha); }

namespace {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("KFS_THREADS"); env != nullptr) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

WignerField wigner_transform(const DensityMatrix& rho, const PhaseSpaceGrid& grid, const WignerOptions& options) {
    grid.validate();
    const WignerEvaluator eval(rho);
    const kernels::KernelTable& table = options.isa ? kernels::kernel_table(*options.isa) : kernels::active();

    WignerField field;
    field.grid = grid;
    field.quadrature_weight = grid.cell_area();
    field.imag_residue = eval.imag_residue_bound();
    field.values.assign(static_cast<std::size_t>(grid.nx) * grid.np, 0.0);

    std::vector<double> ps(grid.np);
    for (int j = 0; j < grid.np; ++j) ps[j] = grid.p(j);

    // Every sample is a pure function of its coordinates, so the row split
    // does not affect the result.
    const auto rows = [&](int begin, int end) {
        std::vector<double> xs(grid.np);
        for (int i = begin; i < end; ++i) {
            std::fill(xs.begin(), xs.end(), grid.x(i));
            eval.evaluate(xs, ps, std::span<double>(field.values.data() + static_cast<std::size_t>(i) * grid.np,
                                                    grid.np),
                          table);
        }
    };

    const int threads = std::min(resolve_threads(options.threads), grid.nx);
    if (threads <= 1) {
        rows(0, grid.nx);
    } else {
        std::vector<std::jthread> pool;
        const int chunk = (grid.nx + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int b = t * chunk;
            const int e = std::min(grid.nx, b + chunk);
            if (b < e) pool.emplace_back(rows, b, e);
        }
    }
    return field;
}

double negativity(const WignerField& field) {
    const double norm = field.integral();
    if (std::abs(norm - 1.0) > kNormalizationTolerance) {
        // second moment of W gives a rough radius for the suggestion
        double r2 = 0.0;
        const PhaseSpaceGrid& g = field.grid;
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.np; ++j) r2 += (g.x(i) * g.x(i) + g.p(j) * g.p(j)) * field.at(i, j);
        }
        r2 = std::max(0.0, r2 * field.quadrature_weight);
        const double half_width = 4.0 + 2.0 * std::sqrt(r2);
        std::ostringstream msg;
        msg << "Wigner field integrates to " << norm << " (tolerance " << kNormalizationTolerance
            << "); grid too small, try bounds [" << -half_width << ", " << half_width << "] per axis";
        throw GridTooSmallError(msg.str());
    }
    double s = 0.0;
    for (double v : field.values) {
        if (v < 0.0) s -= v;
    }
    return s * field.quadrature_weight;
}

PhaseSpaceGrid infer_grid(const DensityMatrix& rho, bool auto_grid, double spacing, int max_points) {
    const int dim = rho.dim();
    const ComplexMatrix& r = rho.entries();
    cplx mean_a{}, mean_a2{};
    double mean_n = 0.0;
    for (int n = 1; n < dim; ++n) {
        mean_a += std::sqrt(static_cast<double>(n)) * r(n, n - 1);
        mean_n += n * r(n, n).real();
        if (n >= 2) mean_a2 += std::sqrt(static_cast<double>(n) * (n - 1)) * r(n, n - 2);
    }
    PhaseSpaceGrid g;
    if (auto_grid) {
        const double x2 = (2.0 * mean_a2.real() + 2.0 * mean_n + 1.0) / 4.0;
        const double p2 = (-2.0 * mean_a2.real() + 2.0 * mean_n + 1.0) / 4.0;
        const double sx = std::sqrt(std::max(0.0, x2 - mean_a.real() * mean_a.real()));
        const double sp = std::sqrt(std::max(0.0, p2 - mean_a.imag() * mean_a.imag()));
        g.x_min = mean_a.real() - (4.0 * sx + 1.0);
        g.x_max = mean_a.real() + (4.0 * sx + 1.0);
        g.p_min = mean_a.imag() - (4.0 * sp + 1.0);
        g.p_max = mean_a.imag() + (4.0 * sp + 1.0);
    } else {
        const double h = 4.0 + 2.0 * std::sqrt(std::max(0.0, mean_n)) + std::abs(mean_a);
        g.x_min = g.p_min = -h;
        g.x_max = g.p_max = h;
    }
    const auto count = [&](double width) {
        return std::clamp(static_cast<int>(std::ceil(width / spacing)), 64, std::max(64, max_points));
    };
    g.nx = count(g.x_max - g.x_min);
    g.np = count(g.p_max - g.p_min);
    return g;
}

NegativityReport negativity_with_refinement(const DensityMatrix& rho, const PhaseSpaceGrid& grid,
                                            const WignerOptions& options) {
    NegativityReport rep;
    const double coarse = negativity(wigner_transform(rho, grid, options));
    const PhaseSpaceGrid fine_grid = grid.refined();
    const WignerField fine = wigner_transform(rho, fine_grid, options);
    rep.value = negativity(fine);
    rep.normalization = fine.integral();
    rep.refinement_delta = std::abs(rep.value - coarse);
    rep.refinement_ok = rep.refinement_delta < kRefinementTolerance;
    rep.grid = fine_grid;
    return rep;
}

namespace {

PhaseSpaceGrid widened(const PhaseSpaceGrid& g, double factor, double spacing, int max_points) {
    PhaseSpaceGrid w = g;
    const double cx = 0.5 * (g.x_min + g.x_max), hx = 0.5 * (g.x_max - g.x_min) * factor;
    const double cp = 0.5 * (g.p_min + g.p_max), hp = 0.5 * (g.p_max - g.p_min) * factor;
    w.x_min = cx - hx;
    w.x_max = cx + hx;
    w.p_min = cp - hp;
    w.p_max = cp + hp;
    w.nx = std::clamp(static_cast<int>(std::ceil(2.0 * hx / spacing)), 64, std::max(64, max_points));
    w.np = std::clamp(static_cast<int>(std::ceil(2.0 * hp / spacing)), 64, std::max(64, max_points));
    return w;
}

}  // namespace

NegativityReport negativity_of_state(const DensityMatrix& rho, bool auto_grid, const NegativityOptions& options) {
    PhaseSpaceGrid grid = infer_grid(rho, auto_grid, options.spacing, options.max_points_per_axis);
    WignerField field = wigner_transform(rho, grid, options.wigner);
    // Moment-based bounds can clip strongly non-Gaussian (crescent) states;
    // widen until the normalization error sits well inside the tolerance.
    for (int k = 0; k < 3 && std::abs(field.integral() - 1.0) > 0.1 * kNormalizationTolerance; ++k) {
        grid = widened(grid, 1.5, options.spacing, options.max_points_per_axis);
        field = wigner_transform(rho, grid, options.wigner);
    }

    NegativityReport rep;
    rep.value = negativity(field);
    rep.normalization = field.integral();
    rep.grid = grid;
    if (!options.refine) return rep;

    rep.refinement_ok = false;
    for (int k = 0; k < options.max_refinements; ++k) {
        const PhaseSpaceGrid finer = grid.refined();
        const WignerField f2 = wigner_transform(rho, finer, options.wigner);
        const double v2 = negativity(f2);
        rep.refinement_delta = std::abs(v2 - rep.value);
        rep.value = v2;
        rep.normalization = f2.integral();
        rep.grid = finer;
        grid = finer;
        if (rep.refinement_delta < kRefinementTolerance) {
            rep.refinement_ok = true;
            break;
        }
    }
    return rep;
}

}  // namespace kfs
