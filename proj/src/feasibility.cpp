#include "qmarg/feasibility.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "qmarg/kernels.hpp"
#include "qmarg/linalg.hpp"

namespace qmarg {

namespace {

constexpr double kInconsistencyTol = 1e-9;
constexpr double kPsdSlack = 1e-12;
constexpr double kSupportTol = 1e-10;

Index off_diag_slot(Index side, Index i, Index j) {
    // Row-major position of (i, j), i < j, among the upper off-diagonal entries.
    return i * side - i * (i + 1) / 2 + (j - i - 1);
}

std::vector<std::vector<int>> normalized_subsets(const PartySignature& sig,
                                                 const std::vector<std::vector<int>>& subsets) {
    std::vector<std::vector<int>> out;
    out.reserve(subsets.size());
    for (const auto& s : subsets) out.push_back(normalize_subset(sig, s));
    return out;
}

// Kept / traced flat indices for every full index.
struct SplitIndex {
    std::vector<Index> kept;
    std::vector<Index> traced;
    Index kept_dim = 1;
};

SplitIndex split_indices(const PartySignature& sig, const std::vector<int>& subset) {
    SplitIndex out;
    out.kept.resize(static_cast<size_t>(sig.total()));
    out.traced.resize(static_cast<size_t>(sig.total()));
    for (int p : subset) out.kept_dim *= sig.dim(p);
    for (Index f = 0; f < sig.total(); ++f) {
        const auto dg = sig.digits(f);
        Index k = 0;
        Index t = 0;
        for (int p = 0; p < sig.parties(); ++p) {
            if (std::binary_search(subset.begin(), subset.end(), p)) {
                k = k * sig.dim(p) + dg[static_cast<size_t>(p)];
            } else {
                t = t * sig.dim(p) + dg[static_cast<size_t>(p)];
            }
        }
        out.kept[static_cast<size_t>(f)] = k;
        out.traced[static_cast<size_t>(f)] = t;
    }
    return out;
}

// Partial-trace rows for one subset, written into rows [row0, row0 + ds^2).
void fill_subset_rows(const PartySignature& sig, const std::vector<int>& subset, Eigen::MatrixXd& L, Index row0) {
    const Index D = sig.total();
    const SplitIndex sp = split_indices(sig, subset);
    const Index ds = sp.kept_dim;
    for (Index i = 0; i < D; ++i) {
        const Index a = sp.kept[static_cast<size_t>(i)];
        L(row0 + a, i) += 1.0;
        for (Index j = i + 1; j < D; ++j) {
            if (sp.traced[static_cast<size_t>(i)] != sp.traced[static_cast<size_t>(j)]) continue;
            const Index b = sp.kept[static_cast<size_t>(j)];
            const Index col_re = D + 2 * off_diag_slot(D, i, j);
            const Index lo = std::min(a, b);
            const Index hi = std::max(a, b);
            const Index out_re = row0 + ds + 2 * off_diag_slot(ds, lo, hi);
            L(out_re, col_re) += 1.0;
            L(out_re + 1, col_re + 1) += (a < b) ? 1.0 : -1.0;
        }
    }
}

// Partial-trace rows for each subset followed by one trace row.
Eigen::MatrixXd build_map(const PartySignature& sig, const std::vector<std::vector<int>>& subsets) {
    const Index D = sig.total();
    Index rows = 1;
    for (const auto& s : subsets) {
        const Index ds = sig.sub(s).total();
        rows += ds * ds;
    }
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(rows, D * D);
    Index row0 = 0;
    for (const auto& s : subsets) {
        fill_subset_rows(sig, s, L, row0);
        const Index ds = sig.sub(s).total();
        row0 += ds * ds;
    }
    L.block(row0, 0, 1, D).setOnes();
    return L;
}

double min_eigenvalue(const Eigen::MatrixXcd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
}

Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

// Cyclic shift and clock on one party: no state is an eigenvector of both.
Eigen::MatrixXcd shift_operator(int d) {
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i) x((i + 1) % d, i) = 1.0;
    return x;
}

Eigen::MatrixXcd clock_operator(int d) {
    Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i) z(i, i) = std::polar(1.0, 2.0 * std::numbers::pi * i / d);
    return z;
}

void fill_pairwise(FeasibilityVerdict& v) {
    v.pairwise_distances.clear();
    for (size_t i = 0; i < v.witnesses.size(); ++i) {
        for (size_t j = i + 1; j < v.witnesses.size(); ++j) {
            v.pairwise_distances.push_back(trace_distance(v.witnesses[i].matrix(), v.witnesses[j].matrix()));
        }
    }
}

struct PackedRun {
    Eigen::VectorXd x;
    double step = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Dykstra iteration between an affine set and the PSD cone in packed
// coordinates. The affine set needs no correction term: its normal
// component is annihilated by the next projection anyway.
PackedRun dykstra_packed(Eigen::VectorXd x, const AffineProjector& projector, double tol, int max_iterations) {
    const Index side = projector.side();
    const auto& k = kernels::active();
    const auto n = static_cast<std::size_t>(x.size());
    // ||Delta||_1 <= sqrt(D) ||Delta||_F bounds the trace-norm step.
    const double trace_norm_factor = std::sqrt(static_cast<double>(side));

    Eigen::VectorXd q = Eigen::VectorXd::Zero(x.size());
    Eigen::VectorXd y(x.size());
    Eigen::VectorXd x_next(x.size());
    PackedRun run;
    run.step = std::numeric_limits<double>::infinity();
    // A start that already lies in both sets is a fixed point.
    if (projector.distance(x) < 0.5 * tol && min_eigenvalue(unpack_hermitian(x, side)) >= -kPsdSlack) {
        run.converged = true;
        run.step = 0.0;
    }
    while (!run.converged && run.iterations < max_iterations) {
        ++run.iterations;
        y = x;
        projector.project(y);
        k.axpy(1.0, y.data(), q.data(), n);  // q <- y + q
        x_next = pack_hermitian(project_psd(unpack_hermitian(q, side)));
        k.axpy(-1.0, x_next.data(), q.data(), n);  // q <- y + q - x_next
        run.step = trace_norm_factor * std::sqrt(k.sq_dist(x_next.data(), x.data(), n));
        x.swap(x_next);
        if (run.step < tol && projector.distance(x) < 0.5 * tol) run.converged = true;
    }
    run.x = std::move(x);
    return run;
}

// Orthonormal basis of the subspace that carries every PSD matrix with the
// prescribed marginals: for each constraint, X v = 0 whenever v lies in
// ker(target) tensor the traced space, so the support is the intersection
// of supp(target) tensor the traced space over all constraints.
Eigen::MatrixXcd support_face(const MarginalConstraintSet& cs) {
    const auto& sig = cs.signature();
    const Index D = sig.total();
    Eigen::MatrixXcd Z = Eigen::MatrixXcd::Zero(D, D);
    for (const auto& c : cs.constraints()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(c.target);
        Index nk = 0;
        while (nk < es.eigenvalues().size() && es.eigenvalues()[nk] <= kSupportTol) ++nk;
        if (nk == 0) continue;
        const Eigen::MatrixXcd K = es.eigenvectors().leftCols(nk) * es.eigenvectors().leftCols(nk).adjoint();
        const SplitIndex sp = split_indices(sig, c.subset);
        for (Index i = 0; i < D; ++i) {
            for (Index j = 0; j < D; ++j) {
                if (sp.traced[static_cast<size_t>(i)] != sp.traced[static_cast<size_t>(j)]) continue;
                Z(i, j) += K(sp.kept[static_cast<size_t>(i)], sp.kept[static_cast<size_t>(j)]);
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitize(Z));
    Index r = 0;
    while (r < D && es.eigenvalues()[r] <= 1e-8) ++r;
    if (r == D) return Eigen::MatrixXcd::Identity(D, D);
    return es.eigenvectors().leftCols(r);
}

// Feasibility problem restricted to a support face, in packed coordinates
// of r x r Hermitian matrices (the lift is an isometry).
struct FaceProblem {
    Eigen::MatrixXcd V;
    bool reduced = false;
    std::optional<AffineProjector> projector;

    Eigen::VectorXd to_packed(const Eigen::MatrixXcd& m) const {
        return pack_hermitian(reduced ? Eigen::MatrixXcd(V.adjoint() * m * V) : m);
    }
    Eigen::MatrixXcd from_packed(const Eigen::VectorXd& x) const {
        const Index r = V.cols();
        Eigen::MatrixXcd m = unpack_hermitian(x, r);
        if (reduced) m = V * m * V.adjoint();
        m = hermitize(m);
        return m / m.trace().real();
    }
};

FaceProblem make_face(const MarginalConstraintSet& cs, const Eigen::MatrixXd& L, const Eigen::VectorXd& b,
                      const AffineProjector& full) {
    FaceProblem f;
    f.V = support_face(cs);
    const Index D = full.side();
    const Index r = f.V.cols();
    f.reduced = r < D;
    if (!f.reduced) {
        f.projector.emplace(full);
        return f;
    }
    Eigen::MatrixXd lift(D * D, r * r);
    for (Index c = 0; c < r * r; ++c) {
        const Eigen::VectorXd e = Eigen::VectorXd::Unit(r * r, c);
        lift.col(c) = pack_hermitian(f.V * unpack_hermitian(e, r) * f.V.adjoint());
    }
    f.projector.emplace(L * lift, b, r);
    return f;
}

}  // namespace

// ---------------------------------------------------------------- packing

Eigen::VectorXd pack_hermitian(const Eigen::MatrixXcd& h) {
    const Index D = h.rows();
    Eigen::VectorXd x(D * D);
    for (Index i = 0; i < D; ++i) x[i] = h(i, i).real();
    Index pos = D;
    for (Index i = 0; i < D; ++i) {
        for (Index j = i + 1; j < D; ++j) {
            // Average the two triangles so slightly non-Hermitian input maps
            // to its Hermitian part.
            const complex v = 0.5 * (h(i, j) + std::conj(h(j, i)));
            x[pos++] = std::numbers::sqrt2 * v.real();
            x[pos++] = std::numbers::sqrt2 * v.imag();
        }
    }
    return x;
}

Eigen::MatrixXcd unpack_hermitian(const Eigen::VectorXd& x, Index side) {
    if (x.size() != side * side) throw std::invalid_argument("packed vector has wrong length");
    Eigen::MatrixXcd h(side, side);
    for (Index i = 0; i < side; ++i) h(i, i) = x[i];
    Index pos = side;
    for (Index i = 0; i < side; ++i) {
        for (Index j = i + 1; j < side; ++j) {
            const complex v{x[pos] / std::numbers::sqrt2, x[pos + 1] / std::numbers::sqrt2};
            pos += 2;
            h(i, j) = v;
            h(j, i) = std::conj(v);
        }
    }
    return h;
}

// ---------------------------------------------------------------- constraints

MarginalConstraintSet::MarginalConstraintSet(PartySignature sig, std::vector<MarginalConstraint> constraints)
    : sig_(std::move(sig)), constraints_(std::move(constraints)) {
    for (auto& c : constraints_) {
        c.subset = normalize_subset(sig_, c.subset);
        const Index ds = sig_.sub(c.subset).total();
        if (c.target.rows() != ds || c.target.cols() != ds) {
            throw std::invalid_argument("marginal target has wrong size for its subset");
        }
        if ((c.target - c.target.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
            throw std::invalid_argument("marginal target is not Hermitian");
        }
        if (std::abs(c.target.trace() - complex{1.0}) > 1e-12) {
            throw std::invalid_argument("marginal target trace is not 1");
        }
    }
}

MarginalConstraintSet MarginalConstraintSet::from_state(const Eigen::MatrixXcd& rho, const PartySignature& sig,
                                                        const std::vector<std::vector<int>>& subsets) {
    std::vector<MarginalConstraint> cs;
    for (const auto& s : subsets) {
        auto kept = normalize_subset(sig, s);
        Eigen::MatrixXcd t = hermitize(partial_trace(rho, sig, kept));
        cs.push_back({std::move(kept), std::move(t)});
    }
    return MarginalConstraintSet(sig, std::move(cs));
}

MarginalConstraintSet MarginalConstraintSet::from_state(const DensityMatrix& rho,
                                                        const std::vector<std::vector<int>>& subsets) {
    return from_state(rho.matrix(), rho.signature(), subsets);
}

std::vector<std::vector<int>> MarginalConstraintSet::subsets() const {
    std::vector<std::vector<int>> out;
    for (const auto& c : constraints_) out.push_back(c.subset);
    return out;
}

double MarginalConstraintSet::max_residual(const Eigen::MatrixXcd& m) const {
    double worst = 0.0;
    for (const auto& c : constraints_) {
        worst = std::max(worst, (partial_trace(m, sig_, c.subset) - c.target).norm());
    }
    return worst;
}

Eigen::MatrixXd constraint_map_matrix(const PartySignature& sig, const std::vector<std::vector<int>>& subsets) {
    return build_map(sig, normalized_subsets(sig, subsets));
}

std::vector<Eigen::MatrixXcd> constraint_nullspace(const PartySignature& sig,
                                                   const std::vector<std::vector<int>>& subsets) {
    const Eigen::MatrixXd L = constraint_map_matrix(sig, subsets);
    const auto rk = rank_and_nullspace(L);
    std::vector<Eigen::MatrixXcd> out;
    out.reserve(static_cast<size_t>(rk.null_basis.cols()));
    for (Index c = 0; c < rk.null_basis.cols(); ++c) {
        out.push_back(unpack_hermitian(rk.null_basis.col(c), sig.total()));
    }
    return out;
}

InconsistentConstraints::InconsistentConstraints(double residual)
    : std::runtime_error("marginal constraints are inconsistent; least-squares residual " +
                         std::to_string(residual)),
      residual_(residual) {}

// ---------------------------------------------------------------- projections

Eigen::VectorXd constraint_rhs(const MarginalConstraintSet& constraints) {
    Index rows = 1;
    for (const auto& c : constraints.constraints()) rows += c.target.rows() * c.target.rows();
    Eigen::VectorXd b(rows);
    Index row0 = 0;
    for (const auto& c : constraints.constraints()) {
        const Eigen::VectorXd t = pack_hermitian(c.target);
        b.segment(row0, t.size()) = t;
        row0 += t.size();
    }
    b[row0] = 1.0;
    return b;
}

AffineProjector::AffineProjector(const MarginalConstraintSet& constraints)
    : AffineProjector(build_map(constraints.signature(), constraints.subsets()), constraint_rhs(constraints),
                      constraints.signature().total()) {}

AffineProjector::AffineProjector(const Eigen::MatrixXd& L, const Eigen::VectorXd& b, Index side) : side_(side) {
    if (L.cols() != side * side || L.rows() != b.size()) throw std::invalid_argument("constraint map has wrong size");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(L, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double thresh = TolPolicy{}.threshold(s.size() ? s[0] : 0.0, L.rows(), L.cols());
    Index r = 0;
    while (r < s.size() && s[r] > thresh) ++r;
    range_ = svd.matrixV().leftCols(r);
    const Eigen::VectorXd coeffs = (svd.matrixU().leftCols(r).transpose() * b).cwiseQuotient(s.head(r));
    offset_ = range_ * coeffs;
    residual_ = (L * offset_ - b).norm();
    if (residual_ > kInconsistencyTol) throw InconsistentConstraints(residual_);
    scratch_.resize(r);
}

void AffineProjector::project_kernel(Eigen::VectorXd& x) const {
    const auto& k = kernels::active();
    const auto rows = static_cast<std::size_t>(range_.rows());
    const auto cols = static_cast<std::size_t>(range_.cols());
    k.gemv_t(range_.data(), rows, cols, x.data(), scratch_.data());
    scratch_ = -scratch_;
    k.gemv_n_acc(range_.data(), rows, cols, scratch_.data(), x.data());
}

void AffineProjector::project(Eigen::VectorXd& x) const {
    project_kernel(x);
    kernels::active().axpy(1.0, offset_.data(), x.data(), static_cast<std::size_t>(x.size()));
}

Eigen::MatrixXcd AffineProjector::project(const Eigen::MatrixXcd& x) const {
    Eigen::VectorXd v = pack_hermitian(x);
    project(v);
    return unpack_hermitian(v, side_);
}

double AffineProjector::distance(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = x;
    project(y);
    return std::sqrt(kernels::active().sq_dist(x.data(), y.data(), static_cast<std::size_t>(x.size())));
}

Eigen::MatrixXcd project_affine(const Eigen::MatrixXcd& x, const MarginalConstraintSet& constraints) {
    return AffineProjector(constraints).project(x);
}

Eigen::MatrixXcd project_psd(const Eigen::MatrixXcd& x) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitize(x));
    const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXcd out = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().adjoint();
    return hermitize(out);
}

// ---------------------------------------------------------------- dykstra

void ProjectionConfig::validate() const {
    if (max_iterations <= 0) throw std::invalid_argument("max_iterations must be positive");
    if (!(convergence_tol > 0.0)) throw std::invalid_argument("convergence_tol must be positive");
    if (!(distinctness_tol > 0.0)) throw std::invalid_argument("distinctness_tol must be positive");
    if (restarts <= 0) throw std::invalid_argument("restarts must be positive");
    if (!(perturbation_scale > 0.0)) throw std::invalid_argument("perturbation_scale must be positive");
    if (!(convergence_tol < distinctness_tol)) {
        throw std::invalid_argument("convergence_tol must be below distinctness_tol");
    }
}

DykstraResult dykstra_solve(const Eigen::MatrixXcd& start, const MarginalConstraintSet& constraints,
                            const ProjectionConfig& config) {
    return dykstra_solve(start, constraints, AffineProjector(constraints), config);
}

DykstraResult dykstra_solve(const Eigen::MatrixXcd& start, const MarginalConstraintSet& constraints,
                            const AffineProjector& projector, const ProjectionConfig& config) {
    config.validate();
    const Index D = projector.side();
    if (start.rows() != D || start.cols() != D) throw std::invalid_argument("start has wrong size");
    const PackedRun run = dykstra_packed(pack_hermitian(start), projector, config.convergence_tol, config.max_iterations);
    Eigen::MatrixXcd out = unpack_hermitian(run.x, D);
    out /= out.trace().real();
    const double psd_res = std::max(0.0, -min_eigenvalue(out));
    const double aff_res = projector.distance(pack_hermitian(out));
    return DykstraResult{DensityMatrix(constraints.signature(), std::move(out)), aff_res, psd_res, run.step,
                         run.iterations, run.converged};
}

// ---------------------------------------------------------------- probe

std::string to_string(FeasibilityOutcome v) {
    switch (v) {
        case FeasibilityOutcome::Unique: return "UNIQUE";
        case FeasibilityOutcome::NonUnique: return "NON_UNIQUE";
        case FeasibilityOutcome::Inconclusive: return "INCONCLUSIVE";
    }
    return "UNKNOWN";
}

FeasibilityVerdict uniqueness_probe(const AmplitudeTensor& state, const std::vector<std::vector<int>>& subsets,
                                    const ProjectionConfig& config) {
    config.validate();
    const auto& sig = state.signature();
    const auto subs = normalized_subsets(sig, subsets);
    const DensityMatrix rho = to_density(state);
    FeasibilityVerdict out;

    // A party outside every subset can be rotated freely.
    for (int p = 0; p < sig.parties(); ++p) {
        const bool covered = std::any_of(subs.begin(), subs.end(), [p](const std::vector<int>& s) {
            return std::binary_search(s.begin(), s.end(), p);
        });
        if (covered) continue;
        const int d = sig.dim(p);
        std::optional<DensityMatrix> best;
        double best_dist = 0.0;
        for (const auto& u : {shift_operator(d), clock_operator(d)}) {
            DensityMatrix moved = to_density(apply_local(state, p, u));
            const double dist = trace_distance(moved.matrix(), rho.matrix());
            if (dist > best_dist) {
                best_dist = dist;
                best = std::move(moved);
            }
        }
        out.verdict = FeasibilityOutcome::NonUnique;
        out.witnesses = {rho, *best};
        const auto cs = MarginalConstraintSet::from_state(rho, subs);
        out.max_marginal_residual = cs.constraints().empty() ? 0.0 : cs.max_residual(best->matrix());
        out.note = "party " + std::to_string(p) + " is in no constrained subset";
        fill_pairwise(out);
        return out;
    }

    const auto cs = MarginalConstraintSet::from_state(rho, subs);
    const Eigen::MatrixXd L = build_map(sig, subs);
    const Eigen::VectorXd b = constraint_rhs(cs);
    const AffineProjector projector(L, b, sig.total());
    out.kernel_dim = projector.kernel_dim();
    if (out.kernel_dim == 0) {
        out.verdict = FeasibilityOutcome::Unique;
        out.max_marginal_residual = cs.max_residual(rho.matrix());
        out.note = "constraint kernel is trivial";
        return out;
    }

    const Eigen::VectorXd x_rho = pack_hermitian(rho.matrix());
    const SeededRng base(config.seed);
    std::vector<Eigen::MatrixXcd> found;
    std::vector<Eigen::MatrixXcd> unresolved;
    bool any_distinct = false;
    double max_res = 0.0;

    auto acceptable = [&](const Eigen::MatrixXcd& m) {
        return min_eigenvalue(m) >= -1e-10 && cs.max_residual(m) < config.convergence_tol &&
               trace_distance(m, rho.matrix()) > config.distinctness_tol;
    };
    auto add_found = [&](Eigen::MatrixXcd m) {
        const bool fresh = std::all_of(found.begin(), found.end(), [&](const Eigen::MatrixXcd& f) {
            return trace_distance(f, m) > config.distinctness_tol;
        });
        if (fresh) found.push_back(std::move(m));
    };

    for (int r = 0; r < config.restarts; ++r) {
        SeededRng rng = base.fork(static_cast<std::uint64_t>(r));
        Eigen::VectorXd dir(x_rho.size());
        for (Index i = 0; i < dir.size(); ++i) dir[i] = rng.normal();
        projector.project_kernel(dir);
        dir.normalize();
        const PackedRun run = dykstra_packed(x_rho + config.perturbation_scale * dir, projector,
                                             config.convergence_tol, config.max_iterations);
        Eigen::MatrixXcd end = hermitize(unpack_hermitian(run.x, sig.total()));
        end /= end.trace().real();

        RestartRecord rec;
        rec.iterations = run.iterations;
        rec.converged = run.converged;
        rec.affine_residual = projector.distance(pack_hermitian(end));
        rec.distance_to_state = trace_distance(end, rho.matrix());
        out.restarts.push_back(rec);
        max_res = std::max(max_res, cs.max_residual(end));

        // An endpoint within the distinctness tolerance counts as rho even if
        // the step criterion was not yet met.
        if (rec.distance_to_state <= config.distinctness_tol) continue;
        any_distinct = true;
        if (run.converged && acceptable(end)) {
            add_found(end);
        } else {
            unresolved.push_back(std::move(end));
        }
    }

    // Every consistent state is supported on the face cut out by the
    // marginal supports. Inside it the iteration is well conditioned even
    // when the feasible set touches the cone boundary everywhere (then
    // plain endpoints stall short of the tolerance), and the projection of
    // the face's maximally mixed point is a consistent state well away from
    // a pure rho; it is listed first when available.
    const FaceProblem face = make_face(cs, L, b, projector);
    out.support_dim = face.V.cols();
    if (any_distinct) {
        const Index r = face.V.cols();
        const PackedRun run = dykstra_packed(face.to_packed(face.V * face.V.adjoint() / static_cast<double>(r)),
                                             *face.projector, 1e-3 * config.convergence_tol,
                                             20 * config.max_iterations);
        const Eigen::MatrixXcd centre = face.from_packed(run.x);
        if (run.converged && acceptable(centre)) {
            found.insert(found.begin(), centre);
            std::vector<Eigen::MatrixXcd> dedup;
            for (auto& f : found) {
                const bool fresh = std::all_of(dedup.begin(), dedup.end(), [&](const Eigen::MatrixXcd& g) {
                    return trace_distance(f, g) > config.distinctness_tol;
                });
                if (fresh) dedup.push_back(std::move(f));
            }
            found = std::move(dedup);
        }
    }

    // Endpoints that stalled away from rho are re-solved inside the face:
    // each either returns to rho or becomes a witness.
    Index refined_to_rho = 0;
    Index still_open = 0;
    for (const auto& end : unresolved) {
        const PackedRun run =
            dykstra_packed(face.to_packed(end), *face.projector, config.convergence_tol, config.max_iterations);
        const Eigen::MatrixXcd m = face.from_packed(run.x);
        if (trace_distance(m, rho.matrix()) <= config.distinctness_tol) {
            ++refined_to_rho;
        } else if (run.converged && acceptable(m)) {
            add_found(m);
        } else {
            ++still_open;
        }
    }

    if (!found.empty()) {
        out.verdict = FeasibilityOutcome::NonUnique;
        out.witnesses.push_back(rho);
        for (auto& f : found) out.witnesses.emplace_back(sig, std::move(f));
        double wres = 0.0;
        for (const auto& wmat : out.witnesses) wres = std::max(wres, cs.max_residual(wmat.matrix()));
        out.max_marginal_residual = wres;
        fill_pairwise(out);
        return out;
    }
    out.max_marginal_residual = max_res;
    if (still_open > 0) {
        out.verdict = FeasibilityOutcome::Inconclusive;
        out.note = "distinct endpoints did not converge to consistent states";
    } else {
        out.verdict = FeasibilityOutcome::Unique;
        if (refined_to_rho > 0) {
            out.note = std::to_string(refined_to_rho) + " stalled endpoints returned to the state on the support face";
        }
    }
    return out;
}

SurveyStats genericity_survey(const PartySignature& sig, const std::vector<std::vector<int>>& subsets, int trials,
                              const ProjectionConfig& config) {
    if (trials < 1) throw std::invalid_argument("survey needs at least one trial");
    config.validate();
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    SurveyStats stats;
    stats.trials = trials;
    const SeededRng base(config.seed);
    for (int t = 0; t < trials; ++t) {
        const auto ts = clock::now();
        const SeededRng trial = base.fork(static_cast<std::uint64_t>(t));
        SeededRng state_rng = trial.fork(0);
        const AmplitudeTensor state = haar_random_state(sig, state_rng);
        ProjectionConfig cfg = config;
        cfg.seed = trial.fork(1).seed();
        const FeasibilityVerdict v = uniqueness_probe(state, subsets, cfg);

        SurveyTrial rec;
        rec.trial = t;
        rec.verdict = v.verdict;
        for (const auto& r : v.restarts) {
            rec.max_distance = std::max(rec.max_distance, r.distance_to_state);
            rec.max_iterations = std::max(rec.max_iterations, r.iterations);
        }
        rec.seconds = std::chrono::duration<double>(clock::now() - ts).count();
        switch (v.verdict) {
            case FeasibilityOutcome::Unique: ++stats.unique; break;
            case FeasibilityOutcome::NonUnique: ++stats.non_unique; break;
            case FeasibilityOutcome::Inconclusive: ++stats.inconclusive; break;
        }
        stats.records.push_back(rec);
    }
    stats.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return stats;
}

}  // namespace qmarg
