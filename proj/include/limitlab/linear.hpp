#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "limitlab/config.hpp"
#include "limitlab/dynamics.hpp"

namespace limitlab {

/// x_{k+1} = A x_k on R^n.
class LinearSystem {
public:
    explicit LinearSystem(Eigen::MatrixXd a) : a_(std::move(a)) {
        if (a_.rows() == 0 || a_.rows() != a_.cols()) throw ValidationError("bad_matrix", "A must be square and nonempty");
        if (!a_.allFinite()) throw ValidationError("bad_matrix", "A has non-finite entries");
    }
    const Eigen::MatrixXd& matrix() const noexcept { return a_; }
    std::size_t n() const noexcept { return static_cast<std::size_t>(a_.rows()); }

private:
    Eigen::MatrixXd a_;
};

/// The map x -> A x on R^n, with inverse when A is nonsingular.
inline DiscreteMap make_linear_map(std::string name, const Eigen::MatrixXd& a) {
    LinearSystem sys(a);
    const auto n = static_cast<Eigen::Index>(sys.n());
    Evaluator fwd = [a, n](std::span<const double> x, std::span<double> y) {
        Eigen::Map<Eigen::VectorXd>(y.data(), n).noalias() = a * Eigen::Map<const Eigen::VectorXd>(x.data(), n);
    };
    std::optional<Evaluator> inv;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.isInvertible()) {
        Eigen::MatrixXd ai = lu.inverse();
        inv = [ai, n](std::span<const double> x, std::span<double> y) {
            Eigen::Map<Eigen::VectorXd>(y.data(), n).noalias() = ai * Eigen::Map<const Eigen::VectorXd>(x.data(), n);
        };
    }
    return DiscreteMap(std::move(name), sys.n(), std::move(fwd), std::move(inv), DomainRegion::full_space(sys.n()));
}

enum class ModulusClass { stable, unit, unstable };

inline const char* to_string(ModulusClass c) {
    switch (c) {
        case ModulusClass::stable: return "stable";
        case ModulusClass::unit: return "unit";
        case ModulusClass::unstable: return "unstable";
    }
    return "unknown";
}

/// A distinct eigenvalue (or conjugate pair) with its real generalized eigenspace.
struct SpectralCluster {
    std::complex<double> lambda;  ///< representative, Im >= 0
    bool complex_pair = false;
    std::size_t algebraic = 0;  ///< multiplicity of lambda itself (not counting the conjugate)
    std::size_t geometric = 0;
    ModulusClass cls = ModulusClass::stable;
    Eigen::MatrixXd basis;  ///< orthonormal columns, algebraic (or 2*algebraic) of them

    bool trivial_blocks() const noexcept { return geometric == algebraic; }
};

struct SpectralSplit {
    Eigen::MatrixXd stable, unit, unstable;  ///< basis columns of the three invariant subspaces
    std::vector<SpectralCluster> clusters;
    Eigen::MatrixXd basis;  ///< all cluster bases side by side
    std::vector<Eigen::Index> offsets;  ///< first column of each cluster in `basis`

    struct Dims {
        std::size_t stable, unit, unstable;
        friend bool operator==(const Dims&, const Dims&) = default;
    };
    Dims dims() const {
        return {static_cast<std::size_t>(stable.cols()), static_cast<std::size_t>(unit.cols()),
                static_cast<std::size_t>(unstable.cols())};
    }
};

namespace detail {

inline Eigen::MatrixXd smallest_right_singular(const Eigen::MatrixXd& m, Eigen::Index count) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    // singular values are sorted in decreasing order
    return svd.matrixV().rightCols(count);
}

inline std::size_t numeric_rank(const Eigen::MatrixXcd& m, double tol) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++r;
    return r;
}

inline Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& m, std::size_t k) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(m.rows(), m.cols());
    for (std::size_t i = 0; i < k; ++i) r = r * m;
    return r;
}

/// (A - lambda I) for real lambda, (A - lambda I)(A - conj(lambda) I) for a pair:
/// the real operator whose kernel powers give the generalized eigenspace.
inline Eigen::MatrixXd shifted(const Eigen::MatrixXd& a, const SpectralCluster& c) {
    const auto n = a.rows();
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    if (!c.complex_pair) return a - c.lambda.real() * id;
    return a * a - 2.0 * c.lambda.real() * a + std::norm(c.lambda) * id;
}

// Eigenvalues of a defective block scatter by ~eps^(1/m); 1e-3 keeps
// multiplicity-4 blocks together while separating catalog spectra.
inline constexpr double cluster_tolerance = 1e-3;

}  // namespace detail

/// Stable / unit / unstable invariant subspaces of A. Unit-modulus
/// eigenvalues with nontrivial Jordan blocks (geometric < algebraic
/// multiplicity, decided by the numeric rank of A - lambda I) go to the
/// unstable part. Throws NumericError{ill_conditioned} when the computed
/// subspaces fail to be invariant or to span R^n.
inline SpectralSplit spectral_split(const LinearSystem& sys, double tol_eig = Tolerances{}.tol_eig,
                                    double tol_rank = Tolerances{}.tol_rank) {
    const Eigen::MatrixXd& a = sys.matrix();
    const auto n = a.rows();
    const double anorm = std::max(a.norm(), std::numeric_limits<double>::min());
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    if (es.info() != Eigen::Success) throw NumericError("ill_conditioned", "eigenvalue iteration did not converge");
    Eigen::VectorXcd ev = es.eigenvalues();

    // Greedy clustering on the eigenvalue list, then averaging: the mean of a
    // perturbed defective block is accurate even when its members are not.
    std::vector<std::vector<std::complex<double>>> groups;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        std::complex<double> l = ev(i);
        bool placed = false;
        for (auto& g : groups) {
            std::complex<double> mean = 0;
            for (auto v : g) mean += v;
            mean /= static_cast<double>(g.size());
            if (std::abs(l - mean) < detail::cluster_tolerance * std::max(1.0, std::abs(mean))) {
                g.push_back(l);
                placed = true;
                break;
            }
        }
        if (!placed) groups.push_back({l});
    }

    SpectralSplit split;
    for (const auto& g : groups) {
        std::complex<double> mean = 0;
        for (auto v : g) mean += v;
        mean /= static_cast<double>(g.size());
        SpectralCluster c;
        c.algebraic = g.size();
        if (std::abs(mean.imag()) <= detail::cluster_tolerance * std::max(1.0, std::abs(mean))) {
            c.lambda = {mean.real(), 0.0};
        } else if (mean.imag() > 0) {
            c.lambda = mean;
            c.complex_pair = true;
        } else {
            continue;  // conjugate of an upper-half-plane cluster
        }
        Eigen::MatrixXcd shift = a.cast<std::complex<double>>() -
                                 c.lambda * Eigen::MatrixXcd::Identity(n, n);
        c.geometric = static_cast<std::size_t>(n) - detail::numeric_rank(shift, tol_rank * anorm);
        c.geometric = std::min(c.geometric, c.algebraic);
        Eigen::Index dim = static_cast<Eigen::Index>(c.complex_pair ? 2 * c.algebraic : c.algebraic);
        c.basis = detail::smallest_right_singular(detail::matrix_power(detail::shifted(a, c), c.algebraic), dim);

        double r = std::abs(c.lambda);
        if (r < 1.0 - tol_eig) c.cls = ModulusClass::stable;
        else if (r > 1.0 + tol_eig) c.cls = ModulusClass::unstable;
        else c.cls = c.trivial_blocks() ? ModulusClass::unit : ModulusClass::unstable;

        Eigen::MatrixXd leak = a * c.basis - c.basis * (c.basis.transpose() * a * c.basis);
        if (leak.norm() / anorm > tol_rank)
            throw NumericError("ill_conditioned", "generalized eigenspace residual " +
                                                      format_real(leak.norm() / anorm) + " exceeds tolerance");
        split.clusters.push_back(std::move(c));
    }

    // Deterministic order: by modulus, then argument.
    std::stable_sort(split.clusters.begin(), split.clusters.end(), [](const auto& x, const auto& y) {
        if (std::abs(x.lambda) != std::abs(y.lambda)) return std::abs(x.lambda) < std::abs(y.lambda);
        return std::arg(x.lambda) < std::arg(y.lambda);
    });

    auto append = [n](Eigen::MatrixXd& dst, const Eigen::MatrixXd& cols) {
        Eigen::MatrixXd tmp(n, dst.cols() + cols.cols());
        tmp << dst, cols;
        dst = std::move(tmp);
    };
    split.stable.resize(n, 0);
    split.unit.resize(n, 0);
    split.unstable.resize(n, 0);
    split.basis.resize(n, 0);
    for (const auto& c : split.clusters) {
        split.offsets.push_back(split.basis.cols());
        append(split.basis, c.basis);
        switch (c.cls) {
            case ModulusClass::stable: append(split.stable, c.basis); break;
            case ModulusClass::unit: append(split.unit, c.basis); break;
            case ModulusClass::unstable: append(split.unstable, c.basis); break;
        }
    }
    if (split.basis.cols() != n)
        throw NumericError("ill_conditioned", "eigenvalue clusters do not account for every dimension");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(split.basis);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= tol_rank * sv(0))
        throw NumericError("ill_conditioned", "invariant subspaces do not span R^n");
    return split;
}

/// J_m(lambda)^k = sum_{i <= min(k, m-1)} C(k, i) lambda^(k-i) N^i.
inline Eigen::MatrixXd jordan_block_power(double lambda, std::size_t m, std::size_t k) {
    if (m == 0) throw ValidationError("bad_argument", "Jordan block size must be >= 1");
    const auto sz = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(sz, sz);
    double binom = 1.0;
    for (std::size_t i = 0; i <= std::min(k, m - 1); ++i) {
        if (i > 0) binom = binom * static_cast<double>(k - i + 1) / static_cast<double>(i);
        double v = binom * std::pow(lambda, static_cast<double>(k - i));
        for (Eigen::Index r = 0; r + static_cast<Eigen::Index>(i) < sz; ++r) out(r, r + static_cast<Eigen::Index>(i)) = v;
    }
    return out;
}

enum class GrowthVerdict { vanishes, bounded_nonvanishing, unbounded };

inline const char* to_string(GrowthVerdict v) {
    switch (v) {
        case GrowthVerdict::vanishes: return "vanishes";
        case GrowthVerdict::bounded_nonvanishing: return "bounded-nonvanishing";
        case GrowthVerdict::unbounded: return "unbounded";
    }
    return "unknown";
}

/// Growth of A^k xi. `alpha`, `degree` describe ||A^k xi_u|| >= c alpha^k k^degree
/// when unbounded; `c_empirical` is the smallest observed ratio over the probe.
/// The unit part includes eigenvector components of defective unit-modulus
/// blocks, which stay bounded even though their subspace counts as unstable.
struct GrowthClass {
    GrowthVerdict verdict = GrowthVerdict::vanishes;
    double alpha = 0.0;
    std::size_t degree = 0;
    double c_empirical = 0.0;
    double stable_norm = 0.0, unit_norm = 0.0, unstable_norm = 0.0;
};

inline GrowthClass classify_growth(const LinearSystem& sys, const StatePoint& xi, const Tolerances& cfg = {}) {
    if (xi.dim() != sys.n()) throw ValidationError("dim_mismatch", "initial condition dimension does not match A");
    const Eigen::MatrixXd& a = sys.matrix();
    const auto n = a.rows();
    SpectralSplit split = spectral_split(sys, cfg.tol_eig, cfg.tol_rank);
    Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(xi.coords().data(), n);
    Eigen::VectorXd coef = split.basis.colPivHouseholderQr().solve(x);
    const double scale = std::max(x.norm(), std::numeric_limits<double>::min());

    GrowthClass g;
    Eigen::VectorXd xs = Eigen::VectorXd::Zero(n), x1 = Eigen::VectorXd::Zero(n), xu = Eigen::VectorXd::Zero(n);
    for (std::size_t ci = 0; ci < split.clusters.size(); ++ci) {
        const auto& c = split.clusters[ci];
        Eigen::VectorXd part = c.basis * coef.segment(split.offsets[ci], c.basis.cols());
        if (part.norm() <= cfg.tol_zero * scale) continue;
        if (c.cls == ModulusClass::stable) {
            xs += part;
            continue;
        }
        if (c.cls == ModulusClass::unit) {
            x1 += part;
            continue;
        }
        // Chain length: smallest i with M^i part ~ 0, where M kills eigenvectors.
        Eigen::MatrixXd m = detail::shifted(a, c);
        const double mnorm = std::max(m.norm(), 1.0);
        std::size_t chain = 1;
        Eigen::VectorXd v = part;
        for (; chain <= c.algebraic; ++chain) {
            v = m * v;
            if (v.norm() <= cfg.tol_zero * std::pow(mnorm, static_cast<double>(chain)) * part.norm()) break;
        }
        std::size_t degree = chain - 1;
        double r = std::abs(c.lambda);
        if (c.cls == ModulusClass::unstable && r <= 1.0 + cfg.tol_eig && degree == 0) {
            x1 += part;  // eigenvector of a defective unit-modulus block
            continue;
        }
        xu += part;
        double alpha = std::max(r, 1.0);
        if (g.verdict != GrowthVerdict::unbounded || alpha > g.alpha || (alpha == g.alpha && degree > g.degree)) {
            g.alpha = alpha;
            g.degree = degree;
        }
        g.verdict = GrowthVerdict::unbounded;
    }
    g.stable_norm = xs.norm();
    g.unit_norm = x1.norm();
    g.unstable_norm = xu.norm();
    if (g.verdict == GrowthVerdict::unbounded) {
        // log-domain so large alpha^k cannot overflow
        double log_scale = 0.0, best = std::numeric_limits<double>::infinity();
        Eigen::VectorXd v = xu;
        for (std::size_t k = 1; k <= std::max<std::size_t>(cfg.growth_probe, 1); ++k) {
            v = a * v;
            double nv = v.norm();
            if (nv == 0) break;
            log_scale += std::log(nv);
            v /= nv;
            double kk = static_cast<double>(k);
            double lr = log_scale - kk * std::log(g.alpha) - static_cast<double>(g.degree) * std::log(kk);
            best = std::min(best, lr);
        }
        g.c_empirical = std::isfinite(best) ? std::exp(best) : 0.0;
        return g;
    }
    g.verdict = g.unit_norm > 0 ? GrowthVerdict::bounded_nonvanishing : GrowthVerdict::vanishes;
    return g;
}

/// omega(xi) is nonempty exactly when the orbit does not grow without bound.
inline bool omega_nonempty_linear(const LinearSystem& sys, const StatePoint& xi, const Tolerances& cfg = {}) {
    return classify_growth(sys, xi, cfg).verdict != GrowthVerdict::unbounded;
}

struct StabilityBound {
    double m = 0.0;  ///< max_k ||A^k restricted to the subspace||_2
    std::size_t horizon = 0;
    std::size_t argmax = 0;
};

/// Numeric M with ||A^k x|| <= M ||x|| on an A-invariant subspace without
/// unstable part, maximised over k <= 10 n max(1, ceil(1 / (1 - rho_s))).
inline StabilityBound stability_bound(const LinearSystem& sys, const Eigen::MatrixXd& subspace,
                                      const Tolerances& cfg = {}) {
    const Eigen::MatrixXd& a = sys.matrix();
    if (subspace.rows() != a.rows() || subspace.cols() == 0)
        throw ValidationError("dim_mismatch", "subspace basis must have n rows and at least one column");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(subspace);
    qr.setThreshold(cfg.tol_rank);
    const auto d = qr.rank();
    if (d == 0) throw ValidationError("bad_subspace", "subspace basis is numerically zero");
    Eigen::MatrixXd q = Eigen::MatrixXd(qr.householderQ()).leftCols(d);
    const double anorm = std::max(a.norm(), std::numeric_limits<double>::min());
    if ((a * q - q * (q.transpose() * a * q)).norm() / anorm > std::sqrt(cfg.tol_rank))
        throw ValidationError("not_invariant", "subspace is not A-invariant");
    LinearSystem restricted(q.transpose() * a * q);
    SpectralSplit s = spectral_split(restricted, cfg.tol_eig, cfg.tol_rank);
    if (s.unstable.cols() > 0)
        throw NumericError("not_stable", "restricted system has an unstable component");
    double rho = 0.0;
    for (const auto& c : s.clusters)
        if (c.cls == ModulusClass::stable) rho = std::max(rho, std::abs(c.lambda));
    double factor = std::max(1.0, std::ceil(1.0 / (1.0 - rho)));
    StabilityBound out;
    out.horizon = static_cast<std::size_t>(10.0 * static_cast<double>(sys.n()) * factor);
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(d, d);
    for (std::size_t k = 0; k <= out.horizon; ++k) {
        if (k > 0) p = restricted.matrix() * p;
        double nk = Eigen::JacobiSVD<Eigen::MatrixXd>(p).singularValues()(0);
        if (nk > out.m) {
            out.m = nk;
            out.argmax = k;
        }
    }
    if (out.argmax == out.horizon && out.horizon > 0 && out.m > 1.0 + 1e-12)
        throw NumericError("not_stable", "operator norm still growing at the horizon");
    return out;
}

}  // namespace limitlab
