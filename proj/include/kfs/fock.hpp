#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <vector>

#include "kfs/params.hpp"

namespace kfs {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using SparseComplex = Eigen::SparseMatrix<cplx>;

/// Dense operator on the truncated Fock space {|0>, ..., |dim-1>}.
class FockOperator {
public:
    FockOperator() = default;
    explicit FockOperator(ComplexMatrix entries);

    int dim() const { return static_cast<int>(entries_.rows()); }
    const ComplexMatrix& entries() const { return entries_; }
    cplx operator()(int row, int col) const { return entries_(row, col); }

    FockOperator adjoint() const { return FockOperator(entries_.adjoint()); }

private:
    ComplexMatrix entries_;
};

FockOperator operator*(const FockOperator& a, const FockOperator& b);
FockOperator operator+(const FockOperator& a, const FockOperator& b);

/// Invariant residues of a density matrix, as measured (not enforced).
struct StateDiagnostics {
    double hermiticity_residue = 0.0;  ///< max |rho_nm - conj(rho_mn)|
    double trace_error = 0.0;          ///< |Tr rho - 1|
    double trace_imag = 0.0;
    double min_eigenvalue = 0.0;

    bool ok(double herm_tol = 1e-12, double trace_tol = 1e-9, double eig_tol = 1e-6) const {
        return hermiticity_residue <= herm_tol && trace_error <= trace_tol && min_eigenvalue >= -eig_tol;
    }
};

/// rho_nm in the truncated Fock basis, column-major storage.
class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(ComplexMatrix entries);

    static DensityMatrix fock(int n, int dim);
    static DensityMatrix vacuum(int dim) { return fock(0, dim); }
    /// Truncated coherent state |alpha>, renormalized over the cutoff.
    static DensityMatrix coherent(cplx alpha, int dim);
    /// Pure state from an amplitude vector (normalized here).
    static DensityMatrix pure(const Eigen::VectorXcd& psi);

    int dim() const { return static_cast<int>(entries_.rows()); }
    const ComplexMatrix& entries() const { return entries_; }
    ComplexMatrix& entries() { return entries_; }
    cplx operator()(int n, int m) const { return entries_(n, m); }
    cplx& operator()(int n, int m) { return entries_(n, m); }

    cplx trace() const { return entries_.trace(); }
    double hermiticity_residue() const;
    double min_eigenvalue() const;
    StateDiagnostics diagnostics() const;

    /// rho <- (rho + rho^dagger) / 2; returns the max elementwise correction.
    double hermitize();

private:
    ComplexMatrix entries_;
};

/// Trace norm ||a - b||_1 (sum of |eigenvalues| of the Hermitian part).
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// <psi| rho |psi> for the truncated coherent state |alpha>.
double coherent_fidelity(const DensityMatrix& rho, cplx alpha);

/// a with <n-1|a|n> = sqrt(n). Throws DimensionError for n_cut < 2.
FockOperator annihilation_op(int n_cut);
FockOperator creation_op(int n_cut);
FockOperator number_op(int n_cut);

/// H = Delta a^dag a + A (e^{i theta} a^dag + e^{-i theta} a) + (U/2) a^dag a^dag a a,
/// in units hbar = gamma = 1, each term gated by its toggle.
FockOperator build_hamiltonian(const ModelParams& params);

/// d(rho)/dt of the feedback master equation
///   i[H, rho] - (gamma/2) L[a, rho] - (lambda^2 / 2 eta)[n, [n, rho]] + i lambda [n, rho a^dag + a rho]
/// with L[a, rho] = a^dag a rho + rho a^dag a - 2 a rho a^dag.
/// Throws DimensionError when rho.dim() != params.n_cut.
ComplexMatrix apply_rhs(const ModelParams& params, const DensityMatrix& rho);

/// Generator evaluation without validation or allocation; used by the
/// integrator. `out` must already be sized dim x dim.
class RhsEvaluator {
public:
    explicit RhsEvaluator(const ModelParams& params);
    void operator()(const ComplexMatrix& rho, ComplexMatrix& out) const;
    int dim() const { return dim_; }
    /// Largest |generator diagonal| over (n, m): a stiffness bound for step-size checks.
    double max_diagonal_rate() const;

private:
    int dim_;
    std::vector<double> sqrt_n_;
    double detuning_, kerr_half_, loss_half_, loss_, dephasing_, drift_;
    cplx pump_;
};

/// Default ceiling on n_cut for Liouvillian construction (D^2 x D^2).
inline constexpr int kDefaultLiouvillianMaxDim = 128;

/// Superoperator in the column-major vectorization vec(rho)[n + m*D] = rho_nm.
/// Assembled from Kronecker products (vec(A X B) = (B^T kron A) vec X),
/// independently of apply_rhs. Throws ResourceError above max_dim.
SparseComplex build_liouvillian(const ModelParams& params, int max_dim = kDefaultLiouvillianMaxDim);

Eigen::VectorXcd vectorize(const ComplexMatrix& m);
ComplexMatrix unvectorize(const Eigen::VectorXcd& v, int dim);

/// Population in the top ceil(D/10) Fock levels.
double tail_mass(const DensityMatrix& rho);

}  // namespace kfs
