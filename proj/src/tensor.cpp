#include "qmarg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qmarg {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kMinEigenTol = -1e-10;

double hermitian_defect(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Row-sparse form of a single-party basis element: every generalized
// Gell-Mann matrix has at most one nonzero entry per row.
struct SparseRow {
    int col = -1;
    complex value{};
};
using SparseElement = std::vector<SparseRow>;

std::vector<SparseElement> sparse_basis(int d) {
    std::vector<SparseElement> out;
    for (const auto& b : gell_mann_basis(d)) {
        SparseElement rows(static_cast<size_t>(d));
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) {
                if (b(r, c) != complex{}) {
                    rows[static_cast<size_t>(r)] = {c, b(r, c)};
                }
            }
        }
        out.push_back(std::move(rows));
    }
    return out;
}

// Advance a mixed-radix counter; false once it wraps around.
bool next_tuple(std::vector<int>& t, int radix) {
    for (int p = static_cast<int>(t.size()) - 1; p >= 0; --p) {
        if (++t[static_cast<size_t>(p)] < radix) return true;
        t[static_cast<size_t>(p)] = 0;
    }
    return false;
}

}  // namespace

// ---------------------------------------------------------------- signature

PartySignature::PartySignature(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("party signature must be non-empty");
    total_ = 1;
    for (int d : dims_) {
        if (d < 2) throw std::invalid_argument("local dimension must be >= 2, got " + std::to_string(d));
        if (total_ > (Index{1} << 40) / d) throw std::invalid_argument("total dimension overflow");
        total_ *= d;
    }
}

int PartySignature::uniform_dim() const {
    if (dims_.empty()) return 0;
    for (int d : dims_) {
        if (d != dims_.front()) return 0;
    }
    return dims_.front();
}

PartySignature PartySignature::sub(std::span<const int> keep) const {
    std::vector<int> d;
    d.reserve(keep.size());
    for (int p : keep) d.push_back(dim(p));
    return PartySignature(std::move(d));
}

std::vector<int> PartySignature::digits(Index flat) const {
    std::vector<int> out(dims_.size());
    for (int p = parties() - 1; p >= 0; --p) {
        out[static_cast<size_t>(p)] = static_cast<int>(flat % dims_[static_cast<size_t>(p)]);
        flat /= dims_[static_cast<size_t>(p)];
    }
    return out;
}

Index PartySignature::flatten(std::span<const int> digits) const {
    if (digits.size() != dims_.size()) throw std::invalid_argument("digit count does not match signature");
    Index flat = 0;
    for (size_t p = 0; p < dims_.size(); ++p) {
        if (digits[p] < 0 || digits[p] >= dims_[p]) throw std::out_of_range("digit out of range");
        flat = flat * dims_[p] + digits[p];
    }
    return flat;
}

std::vector<int> normalize_subset(const PartySignature& sig, std::span<const int> subset) {
    if (subset.empty()) throw std::invalid_argument("party subset must be non-empty");
    std::vector<int> s(subset.begin(), subset.end());
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
        throw std::invalid_argument("party subset has duplicate entries");
    }
    if (s.front() < 0 || s.back() >= sig.parties()) {
        throw std::invalid_argument("party index out of range");
    }
    return s;
}

// ---------------------------------------------------------------- states

AmplitudeTensor::AmplitudeTensor(PartySignature sig, Eigen::VectorXcd amplitudes)
    : sig_(std::move(sig)), amps_(std::move(amplitudes)) {
    if (amps_.size() != sig_.total()) {
        throw std::invalid_argument("amplitude count " + std::to_string(amps_.size()) +
                                    " does not match total dimension " + std::to_string(sig_.total()));
    }
    if (std::abs(amps_.squaredNorm() - 1.0) > kNormTol) {
        throw std::invalid_argument("state is not normalized");
    }
}

AmplitudeTensor AmplitudeTensor::normalized(PartySignature sig, Eigen::VectorXcd amplitudes) {
    const double n = amplitudes.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("cannot normalize a zero state");
    amplitudes /= n;
    return AmplitudeTensor(std::move(sig), std::move(amplitudes));
}

DensityMatrix::DensityMatrix(PartySignature sig, Eigen::MatrixXcd matrix)
    : sig_(std::move(sig)), mat_(std::move(matrix)) {
    if (mat_.rows() != sig_.total() || mat_.cols() != sig_.total()) {
        throw std::invalid_argument("density matrix side does not match signature");
    }
    if (hermitian_defect(mat_) > kHermitianTol) throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(mat_.trace() - complex{1.0}) > kTraceTol) {
        throw std::invalid_argument("density matrix trace is not 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mat_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < kMinEigenTol) {
        throw std::invalid_argument("density matrix is not positive semidefinite");
    }
}

std::vector<std::vector<int>> BlochTable::support(double threshold) const {
    std::vector<std::vector<int>> out;
    for (const auto& [tuple, c] : coefficients) {
        if (std::abs(c) > threshold) out.push_back(tuple);
    }
    return out;
}

// ---------------------------------------------------------------- rng

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t SeededRng::next_u64() {
    ++draws_;
    return engine_();
}

double SeededRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform_open0() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double SeededRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open0()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

complex SeededRng::complex_normal() {
    const double re = normal();
    const double im = normal();
    return complex{re, im} * (1.0 / std::numbers::sqrt2);
}

SeededRng SeededRng::fork(std::uint64_t index) const {
    return SeededRng(splitmix64(seed_ ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

// ---------------------------------------------------------------- ops

AmplitudeTensor haar_random_state(const PartySignature& sig, SeededRng& rng) {
    Eigen::VectorXcd a(sig.total());
    for (Index i = 0; i < a.size(); ++i) a[i] = rng.complex_normal();
    return AmplitudeTensor::normalized(sig, std::move(a));
}

DensityMatrix to_density(const AmplitudeTensor& state) {
    const auto& a = state.amplitudes();
    Eigen::MatrixXcd rho = a * a.adjoint();
    // Remove the rounding asymmetry of the outer product.
    rho = (0.5 * (rho + rho.adjoint())).eval();
    return DensityMatrix(state.signature(), std::move(rho));
}

Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& m, const PartySignature& sig,
                               std::span<const int> keep) {
    const auto kept = normalize_subset(sig, keep);
    if (m.rows() != sig.total() || m.cols() != sig.total()) {
        throw std::invalid_argument("matrix side does not match signature");
    }
    std::vector<int> traced;
    for (int p = 0; p < sig.parties(); ++p) {
        if (!std::binary_search(kept.begin(), kept.end(), p)) traced.push_back(p);
    }
    const Index dk = sig.sub(kept).total();
    Index dt = 1;
    for (int p : traced) dt *= sig.dim(p);

    // full[a * dt + t] = flat index with kept digits a and traced digits t.
    std::vector<Index> full(static_cast<size_t>(dk * dt));
    for (Index f = 0; f < sig.total(); ++f) {
        const auto dg = sig.digits(f);
        Index a = 0;
        for (int p : kept) a = a * sig.dim(p) + dg[static_cast<size_t>(p)];
        Index t = 0;
        for (int p : traced) t = t * sig.dim(p) + dg[static_cast<size_t>(p)];
        full[static_cast<size_t>(a * dt + t)] = f;
    }

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);
    for (Index a = 0; a < dk; ++a) {
        for (Index b = 0; b < dk; ++b) {
            complex acc{};
            for (Index t = 0; t < dt; ++t) {
                acc += m(full[static_cast<size_t>(a * dt + t)], full[static_cast<size_t>(b * dt + t)]);
            }
            out(a, b) = acc;
        }
    }
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
    const auto kept = normalize_subset(rho.signature(), keep);
    Eigen::MatrixXcd red = partial_trace(rho.matrix(), rho.signature(), kept);
    red = (0.5 * (red + red.adjoint())).eval();
    return DensityMatrix(rho.signature().sub(kept), std::move(red));
}

std::vector<Eigen::MatrixXcd> gell_mann_basis(int d) {
    if (d < 2) throw std::invalid_argument("Gell-Mann basis needs d >= 2");
    std::vector<Eigen::MatrixXcd> out;
    out.push_back(Eigen::MatrixXcd::Identity(d, d));
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(d, d);
            s(j, k) = s(k, j) = 1.0;
            out.push_back(std::move(s));
        }
    }
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
            a(j, k) = complex{0.0, -1.0};
            a(k, j) = complex{0.0, 1.0};
            out.push_back(std::move(a));
        }
    }
    for (int l = 1; l < d; ++l) {
        Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(d, d);
        const double scale = std::sqrt(2.0 / (l * (l + 1.0)));
        for (int j = 0; j < l; ++j) g(j, j) = scale;
        g(l, l) = -l * scale;
        out.push_back(std::move(g));
    }
    return out;
}

BlochTable bloch_decompose(const Eigen::MatrixXcd& m, const PartySignature& sig) {
    const int d = sig.uniform_dim();
    if (d == 0) throw std::invalid_argument("Bloch decomposition needs equal local dimensions");
    if (m.rows() != sig.total() || m.cols() != sig.total()) {
        throw std::invalid_argument("matrix side does not match signature");
    }
    if (hermitian_defect(m) > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("Bloch decomposition needs a Hermitian matrix");
    }
    const auto basis = sparse_basis(d);
    const int n = sig.parties();
    const int radix = d * d;
    const Index total = sig.total();

    BlochTable table{sig, {}};
    std::vector<int> tuple(static_cast<size_t>(n), 0);
    std::vector<int> row_digits(static_cast<size_t>(n));
    do {
        int support = 0;
        for (int t : tuple) support += (t != 0);
        complex tr{};
        // Tr(m B) = sum_c m(col_B(c), c) * B(c, col_B(c)).
        for (Index c = 0; c < total; ++c) {
            Index rem = c;
            for (int p = n - 1; p >= 0; --p) {
                row_digits[static_cast<size_t>(p)] = static_cast<int>(rem % d);
                rem /= d;
            }
            Index col = 0;
            complex v{1.0};
            bool zero = false;
            for (int p = 0; p < n; ++p) {
                const auto& e = basis[static_cast<size_t>(tuple[static_cast<size_t>(p)])]
                                     [static_cast<size_t>(row_digits[static_cast<size_t>(p)])];
                if (e.col < 0) {
                    zero = true;
                    break;
                }
                col = col * d + e.col;
                v *= e.value;
            }
            if (!zero) tr += m(col, c) * v;
        }
        table.coefficients[tuple] = std::pow(d / 2.0, support) * tr.real();
    } while (next_tuple(tuple, radix));
    return table;
}

BlochTable bloch_decompose(const DensityMatrix& rho) {
    return bloch_decompose(rho.matrix(), rho.signature());
}

Eigen::MatrixXcd bloch_reconstruct(const BlochTable& table) {
    const auto& sig = table.signature;
    const int d = sig.uniform_dim();
    if (d == 0) throw std::invalid_argument("Bloch reconstruction needs equal local dimensions");
    const auto basis = sparse_basis(d);
    const int n = sig.parties();
    const Index total = sig.total();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(total, total);
    std::vector<int> row_digits(static_cast<size_t>(n));
    for (const auto& [tuple, coeff] : table.coefficients) {
        if (static_cast<int>(tuple.size()) != n) throw std::invalid_argument("Bloch tuple arity mismatch");
        if (coeff == 0.0) continue;
        for (Index r = 0; r < total; ++r) {
            Index rem = r;
            for (int p = n - 1; p >= 0; --p) {
                row_digits[static_cast<size_t>(p)] = static_cast<int>(rem % d);
                rem /= d;
            }
            Index col = 0;
            complex v{1.0};
            bool zero = false;
            for (int p = 0; p < n; ++p) {
                const auto& e = basis.at(static_cast<size_t>(tuple[static_cast<size_t>(p)]))
                                    [static_cast<size_t>(row_digits[static_cast<size_t>(p)])];
                if (e.col < 0) {
                    zero = true;
                    break;
                }
                col = col * d + e.col;
                v *= e.value;
            }
            if (!zero) out(r, col) += coeff * v;
        }
    }
    return out / static_cast<double>(total);
}

Eigen::MatrixXcd random_hermitian(Index side, SeededRng& rng) {
    Eigen::MatrixXcd g(side, side);
    for (Index j = 0; j < side; ++j) {
        for (Index i = 0; i < side; ++i) g(i, j) = rng.complex_normal();
    }
    return 0.5 * (g + g.adjoint());
}

Eigen::MatrixXcd random_unitary(Index side, SeededRng& rng) {
    Eigen::MatrixXcd g(side, side);
    for (Index j = 0; j < side; ++j) {
        for (Index i = 0; i < side; ++i) g(i, j) = rng.complex_normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(side, side);
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix column phases so the distribution is Haar.
    for (Index j = 0; j < side; ++j) {
        const complex diag = r(j, j);
        const double mag = std::abs(diag);
        if (mag > 0.0) q.col(j) *= diag / mag;
    }
    return q;
}

double trace_norm(const Eigen::MatrixXcd& hermitian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitian, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    const Eigen::MatrixXcd diff = a - b;
    return 0.5 * trace_norm(0.5 * (diff + diff.adjoint()));
}

AmplitudeTensor apply_local(const AmplitudeTensor& state, int party, const Eigen::MatrixXcd& u) {
    const auto& sig = state.signature();
    const int d = sig.dim(party);
    if (u.rows() != d || u.cols() != d) throw std::invalid_argument("local operator has wrong size");
    Index right = 1;
    for (int p = party + 1; p < sig.parties(); ++p) right *= sig.dim(p);
    const Index left = sig.total() / (right * d);
    const auto& a = state.amplitudes();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(a.size());
    for (Index l = 0; l < left; ++l) {
        for (Index r = 0; r < right; ++r) {
            for (int i = 0; i < d; ++i) {
                complex acc{};
                for (int j = 0; j < d; ++j) acc += u(i, j) * a[(l * d + j) * right + r];
                out[(l * d + i) * right + r] = acc;
            }
        }
    }
    return AmplitudeTensor::normalized(sig, std::move(out));
}

AmplitudeTensor permute_parties(const AmplitudeTensor& state, std::span<const int> perm) {
    const auto& sig = state.signature();
    if (static_cast<int>(perm.size()) != sig.parties()) throw std::invalid_argument("permutation size mismatch");
    std::vector<int> check(perm.begin(), perm.end());
    std::sort(check.begin(), check.end());
    for (int p = 0; p < sig.parties(); ++p) {
        if (check[static_cast<size_t>(p)] != p) throw std::invalid_argument("not a permutation");
    }
    std::vector<int> new_dims;
    for (int p : perm) new_dims.push_back(sig.dim(p));
    PartySignature out_sig(new_dims);
    Eigen::VectorXcd out(sig.total());
    std::vector<int> nd(perm.size());
    for (Index f = 0; f < sig.total(); ++f) {
        const auto dg = sig.digits(f);
        for (size_t p = 0; p < perm.size(); ++p) nd[p] = dg[static_cast<size_t>(perm[p])];
        out[out_sig.flatten(nd)] = state.amplitudes()[f];
    }
    return AmplitudeTensor(std::move(out_sig), std::move(out));
}

AmplitudeTensor merge_parties(const AmplitudeTensor& state, std::span<const int> group_sizes) {
    const auto& sig = state.signature();
    std::vector<int> dims;
    int p = 0;
    for (int g : group_sizes) {
        if (g < 1) throw std::invalid_argument("group size must be positive");
        int d = 1;
        for (int k = 0; k < g; ++k) {
            if (p >= sig.parties()) throw std::invalid_argument("group sizes exceed party count");
            d *= sig.dim(p++);
        }
        dims.push_back(d);
    }
    if (p != sig.parties()) throw std::invalid_argument("group sizes do not cover all parties");
    return AmplitudeTensor(PartySignature(std::move(dims)), state.amplitudes());
}

AmplitudeTensor ghz_state(const PartySignature& sig, complex a, complex b) {
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(sig.total());
    std::vector<int> ones(static_cast<size_t>(sig.parties()), 1);
    amps[0] = a;
    amps[sig.flatten(ones)] = b;
    return AmplitudeTensor::normalized(sig, std::move(amps));
}

AmplitudeTensor basis_state(const PartySignature& sig, std::span<const int> digits) {
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(sig.total());
    amps[sig.flatten(digits)] = 1.0;
    return AmplitudeTensor(sig, std::move(amps));
}

}  // namespace qmarg
