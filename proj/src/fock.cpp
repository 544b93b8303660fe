#include "kfs/fock.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

#include "kfs/errors.hpp"
#include "kfs/kernels/kernels.hpp"

namespace kfs {

FockOperator::FockOperator(ComplexMatrix entries) : entries_(std::move(entries)) {}

namespace {

void require_same_dim(int a, int b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                             std::to_string(b) + ")");
    }
}

}  // namespace

FockOperator operator*(const FockOperator& a, const FockOperator& b) {
    require_same_dim(a.dim(), b.dim(), "operator product");
    return FockOperator(a.entries() * b.entries());
}

FockOperator operator+(const FockOperator& a, const FockOperator& b) {
    require_same_dim(a.dim(), b.dim(), "operator sum");
    return FockOperator(a.entries() + b.entries());
}

DensityMatrix::DensityMatrix(ComplexMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) throw DimensionError("density matrix must be square");
}

DensityMatrix DensityMatrix::fock(int n, int dim) {
    if (dim < 1 || n < 0 || n >= dim) throw DimensionError("Fock level outside the cutoff");
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    m(n, n) = 1.0;
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::coherent(cplx alpha, int dim) {
    Eigen::VectorXcd psi(dim);
    // amplitudes e^{-|a|^2/2} a^n / sqrt(n!) by recurrence
    psi(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < dim; ++n) psi(n) = psi(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return pure(psi);
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
    const Eigen::VectorXcd v = psi / psi.norm();
    return DensityMatrix(v * v.adjoint());
}

double DensityMatrix::hermiticity_residue() const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    const ComplexMatrix h = 0.5 * (entries_ + entries_.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

StateDiagnostics DensityMatrix::diagnostics() const {
    StateDiagnostics d;
    d.hermiticity_residue = hermiticity_residue();
    const cplx tr = trace();
    d.trace_error = std::abs(tr - 1.0);
    d.trace_imag = std::abs(tr.imag());
    d.min_eigenvalue = min_eigenvalue();
    return d;
}

double DensityMatrix::hermitize() {
    const ComplexMatrix h = 0.5 * (entries_ + entries_.adjoint());
    const double correction = (h - entries_).cwiseAbs().maxCoeff();
    entries_ = h;
    return correction;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    require_same_dim(a.dim(), b.dim(), "trace_distance");
    const ComplexMatrix diff = a.entries() - b.entries();
    const ComplexMatrix h = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

double coherent_fidelity(const DensityMatrix& rho, cplx alpha) {
    const int dim = rho.dim();
    Eigen::VectorXcd psi(dim);
    psi(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < dim; ++n) psi(n) = psi(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    return (psi.adjoint() * rho.entries() * psi)(0, 0).real();
}

FockOperator annihilation_op(int n_cut) {
    if (n_cut < 2) throw DimensionError("annihilation_op: n_cut must be >= 2, got " + std::to_string(n_cut));
    ComplexMatrix a = ComplexMatrix::Zero(n_cut, n_cut);
    for (int n = 1; n < n_cut; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return FockOperator(std::move(a));
}

FockOperator creation_op(int n_cut) { return annihilation_op(n_cut).adjoint(); }

FockOperator number_op(int n_cut) {
    if (n_cut < 2) throw DimensionError("number_op: n_cut must be >= 2");
    ComplexMatrix n = ComplexMatrix::Zero(n_cut, n_cut);
    for (int k = 0; k < n_cut; ++k) n(k, k) = static_cast<double>(k);
    return FockOperator(std::move(n));
}

FockOperator build_hamiltonian(const ModelParams& params) {
    params.validate();
    const int dim = params.n_cut;
    const TermToggles& t = params.terms;
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    if (!t.hamiltonian) return FockOperator(std::move(h));

    const ComplexMatrix a = annihilation_op(dim).entries();
    const ComplexMatrix ad = a.adjoint();
    const ComplexMatrix n = ad * a;
    h += params.delta * n;
    if (t.pump) {
        const cplx phase = std::polar(1.0, params.theta);
        h += params.amp * (phase * ad + std::conj(phase) * a);
    }
    if (t.kerr) h += 0.5 * params.u * (ad * ad * a * a);
    return FockOperator(std::move(h));
}

RhsEvaluator::RhsEvaluator(const ModelParams& params) : dim_(params.n_cut), sqrt_n_(params.n_cut + 1) {
    params.validate();
    for (int k = 0; k <= dim_; ++k) sqrt_n_[k] = std::sqrt(static_cast<double>(k));
    const TermToggles& t = params.terms;
    detuning_ = t.hamiltonian ? params.delta : 0.0;
    kerr_half_ = (t.hamiltonian && t.kerr) ? 0.5 * params.u : 0.0;
    pump_ = (t.hamiltonian && t.pump) ? std::polar(params.amp, params.theta) : cplx{};
    loss_half_ = t.lindblad ? 0.5 : 0.0;
    loss_ = t.lindblad ? 1.0 : 0.0;
    dephasing_ = params.dephasing_rate();
    drift_ = t.feedback_drift ? params.lam : 0.0;
}

void RhsEvaluator::operator()(const ComplexMatrix& rho, ComplexMatrix& out) const {
    kernels::RhsCoefficients c;
    c.dim = dim_;
    c.detuning = detuning_;
    c.kerr_half = kerr_half_;
    c.pump = pump_;
    c.loss_half = loss_half_;
    c.loss = loss_;
    c.dephasing = dephasing_;
    c.drift = drift_;
    c.sqrt_n = sqrt_n_.data();
    kernels::active().rhs(c, rho.data(), out.data(), 0, dim_);
}

double RhsEvaluator::max_diagonal_rate() const {
    double worst = 0.0;
    for (int n = 0; n < dim_; ++n) {
        for (int m = 0; m < dim_; m += std::max(1, dim_ - 1)) {
            const double diff = n - m;
            const double h_n = detuning_ * n + kerr_half_ * n * (n - 1.0);
            const double h_m = detuning_ * m + kerr_half_ * m * (m - 1.0);
            const double re = loss_half_ * (n + m) + dephasing_ * diff * diff;
            worst = std::max(worst, std::hypot(re, h_n - h_m));
        }
    }
    return worst;
}

ComplexMatrix apply_rhs(const ModelParams& params, const DensityMatrix& rho) {
    params.validate();
    require_same_dim(rho.dim(), params.n_cut, "apply_rhs");
    RhsEvaluator eval(params);
    ComplexMatrix out(rho.dim(), rho.dim());
    eval(rho.entries(), out);
    return out;
}

SparseComplex build_liouvillian(const ModelParams& params, int max_dim) {
    params.validate();
    const int dim = params.n_cut;
    if (dim > max_dim) {
        throw ResourceError("Liouvillian for n_cut=" + std::to_string(dim) + " exceeds the memory guard (n_cut <= " +
                            std::to_string(max_dim) + "); use time evolution instead");
    }
    const TermToggles& t = params.terms;
    const cplx i(0.0, 1.0);

    SparseComplex id(dim, dim);
    id.setIdentity();
    const SparseComplex a = annihilation_op(dim).entries().sparseView();
    const SparseComplex ad = SparseComplex(a.adjoint());
    const SparseComplex n = ad * a;
    const SparseComplex h = build_hamiltonian(params).entries().sparseView();

    const auto left = [&](const SparseComplex& op) -> SparseComplex { return Eigen::kroneckerProduct(id, op); };
    const auto right = [&](const SparseComplex& op) -> SparseComplex {
        return Eigen::kroneckerProduct(SparseComplex(op.transpose()), id);
    };

    SparseComplex l(dim * dim, dim * dim);
    if (t.hamiltonian) l += i * (left(h) - right(h));
    if (t.lindblad) {
        const SparseComplex sandwich = Eigen::kroneckerProduct(SparseComplex(ad.transpose()), a);
        l += -0.5 * (left(n) + right(n) - 2.0 * sandwich);
    }
    if (const double kappa = params.dephasing_rate(); kappa != 0.0) {
        const SparseComplex n2 = n * n;
        const SparseComplex sandwich = Eigen::kroneckerProduct(SparseComplex(n.transpose()), n);
        l += -kappa * (left(n2) + right(n2) - 2.0 * sandwich);
    }
    if (t.feedback_drift && params.lam != 0.0) {
        const SparseComplex x = right(ad) + left(a);
        l += (i * params.lam) * SparseComplex(left(n) * x - right(n) * x);
    }
    l.prune(cplx(0.0, 0.0));
    l.makeCompressed();
    return l;
}

Eigen::VectorXcd vectorize(const ComplexMatrix& m) {
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

ComplexMatrix unvectorize(const Eigen::VectorXcd& v, int dim) {
    if (v.size() != static_cast<Eigen::Index>(dim) * dim) throw DimensionError("unvectorize: size mismatch");
    return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

double tail_mass(const DensityMatrix& rho) {
    const int dim = rho.dim();
    const int levels = std::max(1, (dim + 9) / 10);
    double mass = 0.0;
    for (int k = dim - levels; k < dim; ++k) mass += rho(k, k).real();
    return mass;
}

}  // namespace kfs
