// tensor.hpp
// Dense multi-party states: signatures, pure-state amplitudes, density
// matrices, partial traces, Bloch coefficients and seeded Haar sampling.
//
// Index convention: row-major over parties, first party slowest-varying.

#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qmarg {

using complex = std::complex<double>;
using Index = Eigen::Index;

// Local Hilbert-space dimensions of each party.
class PartySignature {
public:
    PartySignature() = default;
    explicit PartySignature(std::vector<int> dims);
    PartySignature(std::initializer_list<int> dims)
        : PartySignature(std::vector<int>(dims)) {}

    const std::vector<int>& dims() const { return dims_; }
    int parties() const { return static_cast<int>(dims_.size()); }
    int dim(int party) const { return dims_.at(static_cast<size_t>(party)); }
    Index total() const { return total_; }

    // Common local dimension, or 0 when the parties differ.
    int uniform_dim() const;

    // Signature of the parties listed in `keep` (order preserved).
    PartySignature sub(std::span<const int> keep) const;

    // Per-party digits of a flat index.
    std::vector<int> digits(Index flat) const;
    Index flatten(std::span<const int> digits) const;

    bool operator==(const PartySignature&) const = default;

private:
    std::vector<int> dims_;
    Index total_ = 0;
};

// Validate a party subset against a signature and return it sorted.
// Throws std::invalid_argument on empty subsets, duplicates or
// out-of-range indices.
std::vector<int> normalize_subset(const PartySignature& sig, std::span<const int> subset);

class AmplitudeTensor {
public:
    // Requires squared norm 1 within 1e-12.
    AmplitudeTensor(PartySignature sig, Eigen::VectorXcd amplitudes);

    // Rescales `amplitudes` to unit norm first.
    static AmplitudeTensor normalized(PartySignature sig, Eigen::VectorXcd amplitudes);

    const PartySignature& signature() const { return sig_; }
    const Eigen::VectorXcd& amplitudes() const { return amps_; }

    complex operator()(std::span<const int> digits) const { return amps_[sig_.flatten(digits)]; }

private:
    PartySignature sig_;
    Eigen::VectorXcd amps_;
};

class DensityMatrix {
public:
    // Checks: Hermitian within 1e-12, trace 1 within 1e-12, minimum
    // eigenvalue >= -1e-10.
    DensityMatrix(PartySignature sig, Eigen::MatrixXcd matrix);

    const PartySignature& signature() const { return sig_; }
    const Eigen::MatrixXcd& matrix() const { return mat_; }

private:
    PartySignature sig_;
    Eigen::MatrixXcd mat_;
};

// Real-valued coefficients over products of generalized Gell-Mann matrices.
// rho = (1/D) * sum_T c_T * B_{t_1} x ... x B_{t_n}, with B_0 = identity
// and c_T = (d/2)^{|supp T|} * Tr(rho B_T). At d = 2 this is the Pauli
// expansion with c_T = Tr(rho sigma_T).
struct BlochTable {
    PartySignature signature;
    std::map<std::vector<int>, double> coefficients;

    // Entries with |c| > threshold, identity tuple included.
    std::vector<std::vector<int>> support(double threshold = 1e-12) const;
};

// 64-bit seeded generator. Same seed and call sequence gives the same
// stream on every platform; distributions are implemented here rather than
// through <random> adaptors, whose output is implementation-defined.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draws() const { return draws_; }

    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double uniform();
    // Uniform in (0, 1].
    double uniform_open0();
    // Standard normal (Box-Muller, one pair cached).
    double normal();
    // Standard complex Gaussian: real and imaginary parts N(0, 1/2).
    complex complex_normal();
    // Independent child stream, a pure function of (seed, index).
    SeededRng fork(std::uint64_t index) const;

private:
    std::uint64_t seed_;
    std::uint64_t draws_ = 0;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

AmplitudeTensor haar_random_state(const PartySignature& sig, SeededRng& rng);

DensityMatrix to_density(const AmplitudeTensor& state);

// Partial trace of any square matrix on the signature's space, keeping the
// listed parties (order of `keep` is normalized to ascending).
Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& m, const PartySignature& sig,
                               std::span<const int> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);

// Single-party generalized Gell-Mann basis for dimension d: index 0 is the
// identity, then symmetric, antisymmetric and diagonal elements, each with
// Tr(B_i B_j) = 2 delta_ij.
std::vector<Eigen::MatrixXcd> gell_mann_basis(int d);

// Requires all local dimensions equal and a Hermitian matrix.
BlochTable bloch_decompose(const Eigen::MatrixXcd& m, const PartySignature& sig);
BlochTable bloch_decompose(const DensityMatrix& rho);
Eigen::MatrixXcd bloch_reconstruct(const BlochTable& table);

Eigen::MatrixXcd random_hermitian(Index side, SeededRng& rng);
Eigen::MatrixXcd random_unitary(Index side, SeededRng& rng);

double trace_norm(const Eigen::MatrixXcd& hermitian);
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Apply a unitary to one party of a pure state.
AmplitudeTensor apply_local(const AmplitudeTensor& state, int party, const Eigen::MatrixXcd& u);

// Reorder parties so that the new party p is the old party perm[p].
AmplitudeTensor permute_parties(const AmplitudeTensor& state, std::span<const int> perm);

// Merge consecutive runs of parties: group sizes must sum to the party count.
AmplitudeTensor merge_parties(const AmplitudeTensor& state, std::span<const int> group_sizes);

// a|0...0> + b|1...1> on the given signature, normalized.
AmplitudeTensor ghz_state(const PartySignature& sig, complex a = 1.0 / std::numbers::sqrt2,
                          complex b = 1.0 / std::numbers::sqrt2);
AmplitudeTensor basis_state(const PartySignature& sig, std::span<const int> digits);

}  // namespace qmarg
