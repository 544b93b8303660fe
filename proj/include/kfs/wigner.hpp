#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "kfs/fock.hpp"
#include "kfs/kernels/kernels.hpp"

namespace kfs {

/// Uniform phase-space grid with alpha = x + i p. Samples sit at cell
/// midpoints, so sums over samples times cell_area() are midpoint-rule
/// integrals over [x_min, x_max] x [p_min, p_max].
struct PhaseSpaceGrid {
    double x_min = -6.0;
    double x_max = 6.0;
    double p_min = -6.0;
    double p_max = 6.0;
    int nx = 200;
    int np = 200;

    void validate() const;
    double dx() const { return (x_max - x_min) / nx; }
    double dp() const { return (p_max - p_min) / np; }
    double cell_area() const { return dx() * dp(); }
    double x(int i) const { return x_min + (i + 0.5) * dx(); }
    double p(int j) const { return p_min + (j + 0.5) * dp(); }
    /// Same bounds, twice the samples per axis.
    PhaseSpaceGrid refined() const;

    bool operator==(const PhaseSpaceGrid&) const = default;
};

/// W sampled on a grid; values[i * np + j] = W(x(i) + i p(j)).
struct WignerField {
    PhaseSpaceGrid grid;
    std::vector<double> values;
    double quadrature_weight = 0.0;
    /// Upper bound on the imaginary part of W at any point, from the
    /// anti-Hermitian part of rho (displaced-parity elements are bounded by 1).
    double imag_residue = 0.0;

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.np + j]; }
    double integral() const;
};

struct WignerOptions {
    int threads = 0;                         ///< 0: KFS_THREADS or hardware concurrency
    std::optional<kernels::Isa> isa{};       ///< default: runtime detection
};

/// Per-state tables for evaluating W at arbitrary points via normalized
/// associated-Laguerre recurrences (displaced-parity matrix elements).
class WignerEvaluator {
public:
    explicit WignerEvaluator(const DensityMatrix& rho);

    void evaluate(std::span<const double> x, std::span<const double> p, std::span<double> out,
                  const kernels::KernelTable& table = kernels::active()) const;
    double operator()(cplx alpha) const;
    double imag_residue_bound() const { return imag_residue_; }

private:
    kernels::WignerTables tables() const;

    int dim_;
    std::vector<std::size_t> offset_;
    std::vector<double> cos_coef_, sin_coef_, rec_a_, rec_x_, rec_b_, half_lgamma_;
    double imag_residue_ = 0.0;
};

double wigner_at(const DensityMatrix& rho, cplx alpha);

WignerField wigner_transform(const DensityMatrix& rho, const PhaseSpaceGrid& grid, const WignerOptions& options = {});

inline constexpr double kNormalizationTolerance = 1e-3;
inline constexpr double kRefinementTolerance = 1e-3;

/// Midpoint quadrature of (|W| - W)/2. Throws GridTooSmallError when the
/// field's integral is off from 1 by more than kNormalizationTolerance.
double negativity(const WignerField& field);

struct NegativityReport {
    double value = 0.0;
    double normalization = 0.0;       ///< integral of W on the final grid
    double refinement_delta = 0.0;    ///< |N(grid) - N(coarser grid)|, 0 if not refined
    bool refinement_ok = true;        ///< refinement_delta < kRefinementTolerance
    PhaseSpaceGrid grid{};
};

struct NegativityOptions {
    bool refine = true;        ///< double the resolution until the change drops below tolerance
    int max_refinements = 2;
    double spacing = 0.08;     ///< initial auto-grid spacing
    int max_points_per_axis = 1200;
    WignerOptions wigner{};
};

/// Grid bounds from the state's quadrature moments: center +/- (4 sigma + 1)
/// per axis (auto_grid), or the origin-centred square of half-width
/// 4 + 2 sqrt(<n>) + |<a>| otherwise.
PhaseSpaceGrid infer_grid(const DensityMatrix& rho, bool auto_grid, double spacing = 0.08, int max_points = 1200);

/// Inferred grid, widened (up to three times, 1.5x per step) while the field
/// misses normalization by more than a tenth of the tolerance, then optionally refined.
NegativityReport negativity_of_state(const DensityMatrix& rho, bool auto_grid = true,
                                     const NegativityOptions& options = {});

/// Value on `grid` and the change from doubling its resolution.
NegativityReport negativity_with_refinement(const DensityMatrix& rho, const PhaseSpaceGrid& grid,
                                            const WignerOptions& options = {});

}  // namespace kfs
