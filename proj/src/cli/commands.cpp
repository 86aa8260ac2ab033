#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>

#include "qmarg/bounds.hpp"
#include "qmarg/classical.hpp"
#include "qmarg/cli.hpp"
#include "qmarg/feasibility.hpp"
#include "qmarg/uniqueness.hpp"

namespace qmarg::cli {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

constexpr Index kMaxOracleDim = 32;
constexpr Index kMaxSampleDim = 4096;

PartySignature resolve_signature(const RunConfig& cfg, int default_n, int default_d) {
    if (!cfg.dims.empty()) {
        if (cfg.n || cfg.d) throw UsageError("--dims cannot be combined with --n / --d");
        return PartySignature(parse_dims(cfg.dims));
    }
    const int n = cfg.n.value_or(default_n);
    const int d = cfg.d.value_or(default_d);
    if (n < 1) throw UsageError("--n must be >= 1");
    if (d < 2) throw UsageError("--d must be >= 2");
    double total = std::pow(static_cast<double>(d), n);
    if (total > static_cast<double>(kMaxSampleDim)) throw UsageError("total dimension d^n exceeds 4096");
    return PartySignature(std::vector<int>(static_cast<size_t>(n), d));
}

SeededRng state_stream(std::uint64_t seed) { return SeededRng(seed).fork(0); }
std::uint64_t probe_seed(std::uint64_t seed) { return SeededRng(seed).fork(1).seed(); }

std::vector<std::vector<int>> leave_one_out(int parties) {
    std::vector<std::vector<int>> out;
    for (int skip = parties - 1; skip >= 0; --skip) {
        std::vector<int> s;
        for (int p = 0; p < parties; ++p) {
            if (p != skip) s.push_back(p);
        }
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Parties grouped into A, B, C; the linear test uses the marginals on AB and AC.
struct Grouping {
    std::vector<int> a, b, c;

    std::vector<std::vector<int>> subsets() const {
        std::vector<int> ab = a, ac = a;
        ab.insert(ab.end(), b.begin(), b.end());
        ac.insert(ac.end(), c.begin(), c.end());
        std::sort(ab.begin(), ab.end());
        std::sort(ac.begin(), ac.end());
        return {ab, ac};
    }
};

Grouping linear_grouping(const PartySignature& sig, const std::vector<std::vector<int>>* subsets) {
    const int n = sig.parties();
    if (subsets) {
        if (subsets->size() != 2) {
            throw UsageError("the linear test needs exactly two overlapping subsets (AB and AC)");
        }
        const auto& s1 = (*subsets)[0];
        const auto& s2 = (*subsets)[1];
        Grouping g;
        std::set_intersection(s1.begin(), s1.end(), s2.begin(), s2.end(), std::back_inserter(g.a));
        std::set_difference(s1.begin(), s1.end(), s2.begin(), s2.end(), std::back_inserter(g.b));
        std::set_difference(s2.begin(), s2.end(), s1.begin(), s1.end(), std::back_inserter(g.c));
        if (g.a.empty() || g.b.empty() || g.c.empty() ||
            static_cast<int>(g.a.size() + g.b.size() + g.c.size()) != n) {
            throw UsageError("subsets " + format_subsets(*subsets) +
                             " do not define a tripartite grouping covering all parties");
        }
        return g;
    }
    if (n == 3) return {{0}, {1}, {2}};
    const int d = sig.uniform_dim();
    if (n >= 4 && (n - 1) % 3 == 0 && d != 0) {
        const int m = (n - 1) / 3;
        party_split(m, d);  // enforces the dimension cap
        Grouping g;
        for (int p = 0; p <= m; ++p) g.a.push_back(p);
        for (int p = m + 1; p <= 2 * m; ++p) g.b.push_back(p);
        for (int p = 2 * m + 1; p <= 3 * m; ++p) g.c.push_back(p);
        return g;
    }
    throw UsageError("no tripartite grouping for a " + std::to_string(n) +
                     "-party state; pass --subsets with two overlapping groups");
}

AmplitudeTensor to_tripartite(const AmplitudeTensor& state, const Grouping& g) {
    std::vector<int> perm = g.a;
    perm.insert(perm.end(), g.b.begin(), g.b.end());
    perm.insert(perm.end(), g.c.begin(), g.c.end());
    const AmplitudeTensor permuted = permute_parties(state, perm);
    const std::vector<int> sizes{static_cast<int>(g.a.size()), static_cast<int>(g.b.size()),
                                 static_cast<int>(g.c.size())};
    return merge_parties(permuted, sizes);
}

ProjectionConfig projection_config(const RunConfig& cfg, std::uint64_t seed) {
    ProjectionConfig pc;
    pc.max_iterations = cfg.max_iter;
    pc.convergence_tol = cfg.tol_converge;
    pc.distinctness_tol = cfg.tol_distinct;
    pc.restarts = cfg.restarts;
    pc.seed = seed;
    try {
        pc.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return pc;
}

json tolerances_json(const RunConfig& cfg) {
    return {{"tol_rank", cfg.tol_rank},
            {"tol_converge", cfg.tol_converge},
            {"tol_distinct", cfg.tol_distinct},
            {"max_iter", cfg.max_iter},
            {"restarts", cfg.restarts}};
}

json base_report(const std::string& command, json config) {
    return {{"schema", kReportSchema}, {"command", command}, {"config", std::move(config)}};
}

json linear_json(const AmplitudeTensor& tri, const UniquenessVerdict& v) {
    const TripartiteShape s = tripartite_shape(tri);
    json j = {{"shape", {s.M, s.N, s.P}},
              {"bound_satisfied", s.satisfies_bound()},
              {"verdict", to_string(v.verdict)},
              {"null_dim", v.null_dim},
              {"identity_pattern_residual", v.residual},
              {"identity_pattern_match", v.identity_pattern_match}};
    const auto& sv = v.singular_values;
    if (sv.size() > 0) {
        j["largest_singular_value"] = sv[0];
        j["smallest_singular_value"] = sv[sv.size() - 1];
    }
    if (s.satisfies_bound()) {
        const EliminationReport rep = sequential_elimination_trace(tri);
        json steps = json::array();
        for (const auto& st : rep.steps) {
            steps.push_back({{"step", st.index},
                             {"block", st.block},
                             {"rank", st.rank},
                             {"expected_rank", st.expected_rank},
                             {"deviation", st.deviation}});
        }
        j["elimination"] = {{"completed", rep.completed}, {"max_deviation", rep.max_deviation}, {"steps", steps}};
    }
    return j;
}

json oracle_json(const FeasibilityVerdict& v, const DensityMatrix& rho) {
    json restarts = json::array();
    for (const auto& r : v.restarts) {
        restarts.push_back({{"iterations", r.iterations},
                            {"converged", r.converged},
                            {"distance_to_state", r.distance_to_state},
                            {"affine_residual", r.affine_residual}});
    }
    json witnesses = json::array();
    for (size_t i = 1; i < v.witnesses.size(); ++i) {
        witnesses.push_back({{"distance_to_state", trace_distance(v.witnesses[i].matrix(), rho.matrix())},
                             {"matrix", matrix_to_json(v.witnesses[i].matrix())}});
    }
    return {{"verdict", to_string(v.verdict)},
            {"kernel_dim", v.kernel_dim},
            {"support_dim", v.support_dim},
            {"max_marginal_residual", v.max_marginal_residual},
            {"pairwise_distances", v.pairwise_distances},
            {"note", v.note},
            {"restarts", restarts},
            {"witnesses", witnesses}};
}

int oracle_exit(FeasibilityOutcome v) {
    switch (v) {
        case FeasibilityOutcome::Unique: return kExitOk;
        case FeasibilityOutcome::NonUnique: return kExitNegative;
        case FeasibilityOutcome::Inconclusive: return kExitInconclusive;
    }
    return kExitInconclusive;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// CSV of an array of flat objects; columns in the order of the first row.
std::string csv_table(const json& rows) {
    if (!rows.is_array() || rows.empty()) return {};
    std::vector<std::string> cols;
    for (const auto& [key, _] : rows[0].items()) cols.push_back(key);
    std::ostringstream out;
    for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << csv_escape(cols[i]);
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < cols.size(); ++i) {
            const json& cell = row.at(cols[i]);
            out << (i ? "," : "") << csv_escape(cell.is_string() ? cell.get<std::string>() : cell.dump());
        }
        out << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------- surveys

json linear_survey(const PartySignature& sig, const Grouping& g, int trials, std::uint64_t seed, double tol_rank,
                   json& timing) {
    const auto t0 = clock_type::now();
    const SeededRng base(seed);
    LinearTolerances tol;
    tol.rank_relative = tol_rank;
    int unique = 0;
    int null_one = 0;
    double max_residual_unique = 0.0;
    json records = json::array();
    for (int t = 0; t < trials; ++t) {
        SeededRng rng = base.fork(static_cast<std::uint64_t>(t)).fork(0);
        const AmplitudeTensor tri = to_tripartite(haar_random_state(sig, rng), g);
        const UniquenessVerdict v = check_linear_uniqueness(tri, tol);
        if (v.verdict == LinearVerdict::UniqueLinear) {
            ++unique;
            max_residual_unique = std::max(max_residual_unique, v.residual);
        }
        if (v.null_dim == 1) ++null_one;
        records.push_back({{"trial", t},
                           {"verdict", to_string(v.verdict)},
                           {"null_dim", v.null_dim},
                           {"identity_pattern_residual", v.residual}});
    }
    const TripartiteShape s = tripartite_shape(to_tripartite(AmplitudeTensor(sig, Eigen::VectorXcd::Unit(sig.total(), 0)), g));
    timing["seconds"] = seconds_since(t0);
    return {{"shape", {s.M, s.N, s.P}},
            {"trials", trials},
            {"unique_linear", unique},
            {"null_dim_one", null_one},
            {"fraction_unique_linear", static_cast<double>(unique) / trials},
            {"max_residual_unique", max_residual_unique},
            {"records", records}};
}

json oracle_survey(const PartySignature& sig, const std::vector<std::vector<int>>& subsets, int trials,
                   const ProjectionConfig& pc, json& timing) {
    const SurveyStats st = genericity_survey(sig, subsets, trials, pc);
    json records = json::array();
    json trial_seconds = json::array();
    for (const auto& r : st.records) {
        records.push_back({{"trial", r.trial},
                           {"verdict", to_string(r.verdict)},
                           {"max_distance", r.max_distance},
                           {"max_iterations", r.max_iterations}});
        trial_seconds.push_back(r.seconds);
    }
    timing["seconds"] = st.seconds;
    timing["trial_seconds"] = trial_seconds;
    return {{"trials", st.trials},
            {"unique", st.unique},
            {"non_unique", st.non_unique},
            {"inconclusive", st.inconclusive},
            {"fraction_unique", st.fraction_unique()},
            {"fraction_non_unique", st.fraction_non_unique()},
            {"fraction_inconclusive", st.fraction_inconclusive()},
            {"records", records}};
}

void require_trials(int trials) {
    if (trials < 1) throw UsageError("--trials must be >= 1");
}

// ---------------------------------------------------------------- bounds

json bounds_payload(const std::vector<int>& ds, int n_lo, int n_hi, int m_max) {
    json rows = json::array();
    json alpha = json::array();
    json finite = json::array();
    for (int d : ds) {
        for (int n = n_lo; n <= n_hi; ++n) {
            for (int k = 1; k <= n; ++k) {
                const BoundsRow r = bounds_row(n, k, d);
                rows.push_back({{"d", d},
                                {"n", n},
                                {"k", k},
                                {"reduced_param_count", to_string(r.reduced_param_count)},
                                {"pure_param_count", to_string(r.pure_param_count)},
                                {"sufficient_by_count", r.sufficient_by_count}});
            }
            const FiniteFraction f = finite_n_lower_fraction(n, d);
            finite.push_back({{"d", d}, {"n", n}, {"k", f.k}, {"fraction", f.fraction}});
        }
        const AlphaSolution a = solve_alpha_lower(d);
        alpha.push_back({{"d", d}, {"alpha", a.alpha}, {"residual", a.residual}, {"bracket", {a.lo, a.hi}}});
    }
    json upper = json::array();
    for (const auto& u : alpha_upper_table(m_max, ds.empty() ? 2 : ds.front())) {
        upper.push_back({{"m", u.m},
                         {"total_parties", u.total_parties},
                         {"marginal_order", u.marginal_order},
                         {"fraction", u.fraction}});
    }
    return {{"rows", rows},
            {"alpha_lower", alpha},
            {"finite_n", finite},
            {"alpha_upper", upper},
            {"alpha_upper_limit", kAlphaUpperLimit}};
}

// ---------------------------------------------------------------- classical

json classical_payload(const CounterexamplePair& c) {
    double dev_l1 = 0.0;
    for (double v : c.deviation) dev_l1 += std::abs(v);
    return {{"arity", c.p.arity()},
            {"p", c.p.probabilities()},
            {"q", c.q.probabilities()},
            {"deviation", c.deviation},
            {"epsilon", c.epsilon},
            {"max_admissible_epsilon", c.max_admissible_epsilon},
            {"max_marginal_difference", c.max_marginal_difference},
            {"l1_distance", c.l1_distance},
            {"deviation_l1", dev_l1}};
}

void ensure_classical_args(int n, int d) {
    if (n < 2) throw UsageError("--n must be >= 2 for the classical counterexample");
    if (d < 2) throw UsageError("--d must be >= 2");
    if (std::pow(static_cast<double>(d), n) > 1e6) throw UsageError("d^n exceeds 10^6 outcomes");
}

}  // namespace

// ---------------------------------------------------------------- commands

json strip_timing(const json& report) {
    json out = report;
    if (out.is_object()) out.erase("timing");
    return out;
}

CommandResult cmd_sample(const RunConfig& cfg) {
    if (cfg.format != "json") throw UsageError("sample writes JSON only");
    const PartySignature sig = resolve_signature(cfg, 3, 2);
    SeededRng rng = state_stream(cfg.seed);
    CommandResult res;
    res.report = state_to_json(haar_random_state(sig, rng));
    return res;
}

CommandResult cmd_check(const RunConfig& cfg) {
    const auto t0 = clock_type::now();
    const std::string mode = cfg.mode.empty() ? "oracle" : cfg.mode;
    if (mode != "linear" && mode != "oracle" && mode != "both") {
        throw UsageError("--mode must be linear, oracle or both");
    }
    if (cfg.format != "json") throw UsageError("check writes JSON only");
    const AmplitudeTensor state = [&] {
        if (!cfg.state_path.empty()) {
            if (cfg.n || cfg.d || !cfg.dims.empty()) throw UsageError("--state cannot be combined with --n/--d/--dims");
            return load_state(cfg.state_path);
        }
        SeededRng rng = state_stream(cfg.seed);
        return haar_random_state(resolve_signature(cfg, 3, 2), rng);
    }();
    const PartySignature& sig = state.signature();
    std::optional<std::vector<std::vector<int>>> given;
    if (!cfg.subsets.empty()) given = parse_subsets(cfg.subsets, sig.parties());

    std::optional<Grouping> grouping;
    if (mode != "oracle") grouping = linear_grouping(sig, given ? &*given : nullptr);
    const std::vector<std::vector<int>> subsets =
        given ? *given : (grouping ? grouping->subsets() : leave_one_out(sig.parties()));

    json config = {{"mode", mode},
                   {"signature", sig.dims()},
                   {"subsets", format_subsets(subsets)},
                   {"seed", cfg.seed},
                   {"state", cfg.state_path.empty() ? json("haar") : json(cfg.state_path)},
                   {"tolerances", tolerances_json(cfg)}};
    CommandResult res;
    res.report = base_report("check", std::move(config));
    json result;
    json timing;

    if (grouping) {
        const auto tl = clock_type::now();
        const AmplitudeTensor tri = to_tripartite(state, *grouping);
        LinearTolerances tol;
        tol.rank_relative = cfg.tol_rank;
        const UniquenessVerdict v = check_linear_uniqueness(tri, tol);
        json lj = linear_json(tri, v);
        lj["grouping"] = {{"A", grouping->a}, {"B", grouping->b}, {"C", grouping->c}};
        result["linear"] = std::move(lj);
        timing["linear_seconds"] = seconds_since(tl);
        res.exit_code = v.verdict == LinearVerdict::UniqueLinear ? kExitOk : kExitNegative;
    }
    if (mode != "linear") {
        if (sig.total() > kMaxOracleDim) {
            throw UsageError("oracle mode supports total dimension up to " + std::to_string(kMaxOracleDim));
        }
        const auto to = clock_type::now();
        const DensityMatrix rho = to_density(state);
        const FeasibilityVerdict v = uniqueness_probe(state, subsets, projection_config(cfg, probe_seed(cfg.seed)));
        result["oracle"] = oracle_json(v, rho);
        timing["oracle_seconds"] = seconds_since(to);
        res.exit_code = oracle_exit(v.verdict);
    }
    timing["seconds"] = seconds_since(t0);
    res.report["result"] = std::move(result);
    res.report["timing"] = std::move(timing);
    return res;
}

CommandResult cmd_survey(const RunConfig& cfg) {
    require_trials(cfg.trials);
    const std::string mode = cfg.mode.empty() ? "oracle" : cfg.mode;
    if (mode != "linear" && mode != "oracle") throw UsageError("survey --mode must be linear or oracle");
    if (cfg.format != "json" && cfg.format != "csv") throw UsageError("--format must be json or csv");

    CommandResult res;
    json timing;
    json result;
    if (mode == "oracle") {
        const PartySignature sig = resolve_signature(cfg, 3, 2);
        if (sig.total() > kMaxOracleDim) {
            throw UsageError("oracle mode supports total dimension up to " + std::to_string(kMaxOracleDim));
        }
        const auto subsets = cfg.subsets.empty() ? leave_one_out(sig.parties()) : parse_subsets(cfg.subsets, sig.parties());
        json config = {{"mode", mode},
                       {"signature", sig.dims()},
                       {"subsets", format_subsets(subsets)},
                       {"trials", cfg.trials},
                       {"seed", cfg.seed},
                       {"tolerances", tolerances_json(cfg)}};
        res.report = base_report("survey", std::move(config));
        result = oracle_survey(sig, subsets, cfg.trials, projection_config(cfg, cfg.seed), timing);
    } else {
        RunConfig c = cfg;
        if (c.dims.empty() && !c.n && !c.d) c.dims = "4,2,2";
        const PartySignature sig = resolve_signature(c, 3, 2);
        std::optional<std::vector<std::vector<int>>> given;
        if (!cfg.subsets.empty()) given = parse_subsets(cfg.subsets, sig.parties());
        const Grouping g = linear_grouping(sig, given ? &*given : nullptr);
        json config = {{"mode", mode},
                       {"signature", sig.dims()},
                       {"subsets", format_subsets(g.subsets())},
                       {"trials", cfg.trials},
                       {"seed", cfg.seed},
                       {"tolerances", tolerances_json(cfg)}};
        res.report = base_report("survey", std::move(config));
        result = linear_survey(sig, g, cfg.trials, cfg.seed, cfg.tol_rank, timing);
    }
    res.csv = csv_table(result["records"]);
    res.report["result"] = std::move(result);
    res.report["timing"] = std::move(timing);
    return res;
}

CommandResult cmd_bounds(const RunConfig& cfg) {
    if (cfg.format != "json" && cfg.format != "csv") throw UsageError("--format must be json or csv");
    const auto t0 = clock_type::now();
    std::vector<int> ds;
    if (!cfg.d_range.empty()) {
        if (cfg.d) throw UsageError("--d cannot be combined with --d-range");
        const auto [lo, hi] = parse_range(cfg.d_range);
        for (int d = lo; d <= hi; ++d) ds.push_back(d);
    } else {
        ds.push_back(cfg.d.value_or(2));
    }
    for (int d : ds) {
        if (d < 2) throw UsageError("d must be >= 2");
    }
    std::pair<int, int> nr{1, 12};
    if (!cfg.n_range.empty()) {
        if (cfg.n) throw UsageError("--n cannot be combined with --n-range");
        nr = parse_range(cfg.n_range);
    } else if (cfg.n) {
        nr = {*cfg.n, *cfg.n};
    }
    if (nr.first < 1 || nr.second > 500) throw UsageError("n must lie in 1..500");
    const int m_max = cfg.m.value_or(5);
    if (m_max < 1) throw UsageError("--m must be >= 1");

    json config = {{"d", ds}, {"n_range", {nr.first, nr.second}}, {"m", m_max}};
    CommandResult res;
    res.report = base_report("bounds", std::move(config));
    json payload = bounds_payload(ds, nr.first, nr.second, m_max);
    res.csv = csv_table(payload["rows"]);
    res.report["result"] = std::move(payload);
    res.report["timing"] = {{"seconds", seconds_since(t0)}};
    return res;
}

CommandResult cmd_classical(const RunConfig& cfg) {
    if (cfg.format != "json") throw UsageError("classical writes JSON only");
    const int n = cfg.n.value_or(3);
    const int d = cfg.d.value_or(2);
    ensure_classical_args(n, d);
    SeededRng rng = state_stream(cfg.seed);
    const JointDistribution p = cfg.uniform ? uniform_joint(n, d) : dirichlet_joint(n, d, rng);
    const double epsilon = cfg.epsilon.value_or(0.5 * max_admissible_epsilon(p));
    json config = {{"n", n},
                   {"d", d},
                   {"epsilon", epsilon},
                   {"epsilon_defaulted", !cfg.epsilon.has_value()},
                   {"p", cfg.uniform ? "uniform" : "dirichlet"},
                   {"seed", cfg.seed}};
    CommandResult res;
    res.report = base_report("classical", std::move(config));
    try {
        res.report["result"] = classical_payload(counterexample_pair(p, epsilon));
    } catch (const EpsilonTooLarge& e) {
        res.report["result"] = {{"rejected", true},
                                {"reason", e.what()},
                                {"requested_epsilon", epsilon},
                                {"max_admissible_epsilon", e.max_admissible()}};
        res.exit_code = kExitNegative;
    }
    return res;
}

// ---------------------------------------------------------------- reproduce

namespace {

struct CheckList {
    json items = json::array();
    bool all = true;

    void add(int criterion, const std::string& name, bool pass, json detail) {
        all = all && pass;
        items.push_back({{"criterion", criterion}, {"name", name}, {"pass", pass}, {"detail", std::move(detail)}});
    }
};

Eigen::MatrixXcd ghz_mixture(const PartySignature& sig) {
    const Index D = sig.total();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(D, D);
    m(0, 0) = 0.5;
    m(D - 1, D - 1) = 0.5;
    return m;
}

}  // namespace

CommandResult cmd_reproduce(const RunConfig& cfg) {
    if (cfg.format != "json") throw UsageError("reproduce writes JSON only");
    const auto t0 = clock_type::now();
    const SeededRng master(cfg.seed);
    json sections;
    json timing;
    CheckList checks;

    // Counting bounds and the lower-bound root.
    {
        const auto ts = clock_type::now();
        std::vector<int> ds(9);
        std::iota(ds.begin(), ds.end(), 2);
        json b = bounds_payload(ds, 1, 10, 5);
        json finite = json::array();
        for (int n : {3, 10, 20, 30, 40, 80}) {
            const FiniteFraction f = finite_n_lower_fraction(n, 2);
            finite.push_back({{"n", n}, {"k", f.k}, {"fraction", f.fraction}});
        }
        b["finite_n_qubits"] = finite;

        const auto tq = clock_type::now();
        const AlphaSolution a2 = solve_alpha_lower(2);
        const double t_a2 = seconds_since(tq);
        checks.add(1, "alpha_lower(2) in [0.1885, 0.1895], residual < 1e-12",
                   a2.alpha >= 0.1885 && a2.alpha <= 0.1895 && a2.residual < 1e-12 && t_a2 < 1.0,
                   {{"alpha", a2.alpha}, {"residual", a2.residual}});

        bool monotone = true;
        double prev = 0.0;
        for (int d = 2; d <= 50; ++d) {
            const double a = solve_alpha_lower(d).alpha;
            monotone = monotone && a >= prev;
            prev = a;
        }
        const AlphaSolution a1000 = solve_alpha_lower(1000);
        checks.add(2, "alpha_lower non-decreasing over d = 2..50 and alpha_lower(1000) > 0.49",
                   monotone && a1000.alpha > 0.49, {{"monotone", monotone}, {"alpha_1000", a1000.alpha}});

        bool identity = true;
        for (int n = 1; n <= 20; ++n) {
            for (int d = 2; d <= 5; ++d) {
                BigInt d2n = 1;
                for (int i = 0; i < 2 * n; ++i) d2n *= d;
                identity = identity && (count_reduced_params(n, n, d) + 1 == d2n);
            }
        }
        checks.add(3, "sum_r C(n,r)(d^2-1)^r = d^(2n) for n <= 20, d <= 5", identity, json::object());

        const BigInt c2 = count_reduced_params(3, 2, 2);
        const BigInt c1 = count_reduced_params(3, 1, 2);
        const BigInt p3 = pure_param_count(3, 2);
        checks.add(4, "(n=3,k=2,d=2): 36 >= 14 and (n=3,k=1,d=2): 9 < 14",
                   c2 == 36 && c1 == 9 && p3 == 14 && c2 >= p3 && c1 < p3,
                   {{"k2", to_string(c2)}, {"k1", to_string(c1)}, {"pure", to_string(p3)}});

        bool upper_ok = true;
        for (const auto& u : alpha_upper_table(5, 2)) {
            // (2m+1)/(3m+1) - 2/3 = 1 / (3 (3m+1)) > 0, decreasing in m.
            upper_ok = upper_ok && 3 * (2 * u.m + 1) - 2 * (3 * u.m + 1) == 1 &&
                       std::abs(u.fraction - (2.0 * u.m + 1) / (3.0 * u.m + 1)) < 1e-15;
        }
        b["alpha_upper_exact_excess"] = "(2m+1)/(3m+1) - 2/3 = 1/(3(3m+1))";
        sections["bounds"] = std::move(b);
        sections["alpha_upper_check"] = upper_ok;
        timing["bounds"] = seconds_since(ts);
    }

    // Linear-uniqueness survey at (4,2,2).
    {
        const PartySignature sig{4, 2, 2};
        json t;
        json s = linear_survey(sig, {{0}, {1}, {2}}, 200, master.fork(2).seed(), 1e-8, t);
        timing["linear_survey"] = t;
        int good = 0;
        for (const auto& r : s["records"]) {
            good += (r["verdict"] == "UNIQUE_LINEAR" && r["null_dim"] == 1 &&
                     r["identity_pattern_residual"].get<double>() < 1e-8)
                        ? 1
                        : 0;
        }
        checks.add(5, "(4,2,2): UNIQUE_LINEAR with null dimension 1 in >= 199/200",
                   good >= 199 && t["seconds"].get<double>() < 10.0, {{"passing", good}});
        s.erase("records");
        sections["linear_survey"] = std::move(s);
    }

    // Identity-pattern invariant on assorted shapes.
    {
        const auto ts = clock_type::now();
        const std::vector<PartySignature> shapes{{2, 2, 2}, {3, 2, 2}, {4, 2, 2}, {2, 3, 2}, {3, 3, 3},
                                                 {5, 2, 3}, {4, 3, 2}, {6, 2, 2}, {2, 2, 4}, {3, 4, 2}};
        const SeededRng base = master.fork(3);
        double worst = 0.0;
        for (int t = 0; t < 1000; ++t) {
            SeededRng rng = base.fork(static_cast<std::uint64_t>(t));
            const AmplitudeTensor a = haar_random_state(shapes[static_cast<size_t>(t) % shapes.size()], rng);
            const ConsistencyMatrix cm = build_consistency_matrix(a);
            const double k_norm = Eigen::JacobiSVD<Eigen::MatrixXcd>(cm.K).singularValues()[0];
            const double r = (cm.K * identity_pattern_vector(cm.shape)).norm() / k_norm;
            worst = std::max(worst, r);
        }
        checks.add(6, "||K v_id|| <= 1e-12 ||K|| on 1000 tensors", worst <= 1e-12, {{"max_ratio", worst}});
        sections["identity_invariant"] = {{"tensors", 1000}, {"max_ratio", worst}};
        timing["identity_invariant"] = seconds_since(ts);
    }

    // Oracle positive control: 3 qubits, all pairs.
    {
        const PartySignature sig{2, 2, 2};
        ProjectionConfig pc;
        pc.seed = master.fork(1).seed();
        json t;
        json s = oracle_survey(sig, {{0, 1}, {0, 2}, {1, 2}}, 20, pc, t);
        timing["oracle_survey"] = t;
        int good = 0;
        for (const auto& r : s["records"]) {
            good += (r["verdict"] == "UNIQUE" && r["max_distance"].get<double>() <= 1e-4) ? 1 : 0;
        }
        checks.add(7, "3 qubits, pairs: UNIQUE with all restarts within 1e-4 in >= 19/20",
                   good >= 19 && t["seconds"].get<double>() < 60.0, {{"passing", good}});
        sections["oracle_survey"] = std::move(s);
    }

    // GHZ negative control.
    {
        const auto ts = clock_type::now();
        const PartySignature sig{2, 2, 2};
        const AmplitudeTensor ghz = ghz_state(sig);
        const DensityMatrix rho = to_density(ghz);
        const std::vector<std::vector<int>> pairs{{0, 1}, {0, 2}, {1, 2}};
        ProjectionConfig pc;
        pc.seed = master.fork(6).seed();
        const FeasibilityVerdict v = uniqueness_probe(ghz, pairs, pc);
        const auto cs = MarginalConstraintSet::from_state(rho, pairs);
        const double mix_res = cs.max_residual(ghz_mixture(sig));
        // The first listed witness is the primary one; the rest are raw
        // restart endpoints accepted at the convergence tolerance.
        double best_dist = 0.0;
        double wres = 1.0;
        double wres_all = 0.0;
        if (v.witnesses.size() > 1) {
            best_dist = trace_distance(v.witnesses[1].matrix(), rho.matrix());
            wres = cs.max_residual(v.witnesses[1].matrix());
        }
        for (size_t i = 1; i < v.witnesses.size(); ++i) {
            wres_all = std::max(wres_all, cs.max_residual(v.witnesses[i].matrix()));
        }
        checks.add(8, "GHZ pairs: NON_UNIQUE, witness residual < 1e-9, distance >= 0.2, mixture residual < 1e-12",
                   v.verdict == FeasibilityOutcome::NonUnique && v.witnesses.size() > 1 && wres < 1e-9 &&
                       best_dist >= 0.2 && mix_res < 1e-12,
                   {{"verdict", to_string(v.verdict)},
                    {"witness_residual", wres},
                    {"witness_distance", best_dist},
                    {"all_witnesses_residual", wres_all},
                    {"mixture_residual", mix_res}});
        const UniquenessVerdict lin = check_linear_uniqueness(ghz);
        sections["ghz_control"] = {{"oracle_verdict", to_string(v.verdict)},
                                   {"witnesses", v.witnesses.size() - (v.witnesses.empty() ? 0 : 1)},
                                   {"witness_distance", best_dist},
                                   {"witness_residual", wres},
                                   {"mixture_residual", mix_res},
                                   {"linear_verdict", to_string(lin.verdict)},
                                   {"linear_null_dim", lin.null_dim}};
        timing["ghz_control"] = seconds_since(ts);
    }

    // Constraint-kernel dimensions.
    {
        const auto ts = clock_type::now();
        const auto k3 = constraint_nullspace(PartySignature{2, 2, 2}, {{0, 1}, {0, 2}, {1, 2}}).size();
        const auto k2 = constraint_nullspace(PartySignature{2, 2}, {{0}, {1}}).size();
        checks.add(9, "kernel dimension 27 (3 qubits, pairs) and 9 (2 qubits, singletons)", k3 == 27 && k2 == 9,
                   {{"three_qubit_pairs", k3}, {"two_qubit_singletons", k2}});
        sections["kernel_dims"] = {{"three_qubit_pairs", k3}, {"two_qubit_singletons", k2}};
        timing["kernel_dims"] = seconds_since(ts);
    }

    // Cross-module consistency on (4,2,2).
    {
        const auto ts = clock_type::now();
        const PartySignature sig{4, 2, 2};
        const SeededRng base = master.fork(4);
        int contradictions = 0;
        int unique_linear = 0;
        int oracle_unique = 0;
        for (int t = 0; t < 50; ++t) {
            const SeededRng trial = base.fork(static_cast<std::uint64_t>(t));
            SeededRng rng = trial.fork(0);
            const AmplitudeTensor a = haar_random_state(sig, rng);
            const bool lin = check_linear_uniqueness(a).verdict == LinearVerdict::UniqueLinear;
            ProjectionConfig pc;
            pc.seed = trial.fork(1).seed();
            const FeasibilityOutcome o = uniqueness_probe(a, {{0, 1}, {0, 2}}, pc).verdict;
            unique_linear += lin ? 1 : 0;
            oracle_unique += o == FeasibilityOutcome::Unique ? 1 : 0;
            contradictions += (lin && o == FeasibilityOutcome::NonUnique) ? 1 : 0;
        }
        checks.add(10, "no (4,2,2) instance is UNIQUE_LINEAR and NON_UNIQUE", contradictions == 0,
                   {{"contradictions", contradictions}});
        sections["cross_check"] = {{"trials", 50},
                                   {"unique_linear", unique_linear},
                                   {"oracle_unique", oracle_unique},
                                   {"contradictions", contradictions}};
        timing["cross_check"] = seconds_since(ts);
    }

    // Classical counterexample.
    {
        const auto ts = clock_type::now();
        const CounterexamplePair c = counterexample_pair(uniform_joint(3, 2), 0.05);
        json payload = classical_payload(c);
        SeededRng rng = master.fork(5);
        const JointDistribution pr = dirichlet_joint(3, 2, rng);
        const CounterexamplePair cr = counterexample_pair(pr, 0.5 * max_admissible_epsilon(pr));
        payload["random_p"] = classical_payload(cr);
        const double dev_l1 = payload["deviation_l1"].get<double>();
        checks.add(11, "classical n=3, d=2, eps=0.05: marginal difference < 1e-14, L1 >= eps ||Delta||_1",
                   c.max_marginal_difference < 1e-14 && c.l1_distance >= 0.05 * dev_l1 * (1.0 - 1e-12),
                   {{"max_marginal_difference", c.max_marginal_difference}, {"l1_distance", c.l1_distance}});
        sections["classical"] = std::move(payload);
        timing["classical"] = seconds_since(ts);
    }

    timing["total"] = seconds_since(t0);
    CommandResult res;
    res.report = base_report("reproduce", {{"seed", cfg.seed}});
    res.report["result"] = {{"sections", std::move(sections)},
                            {"checks", checks.items},
                            {"all_checks_pass", checks.all}};
    res.report["timing"] = std::move(timing);
    res.exit_code = checks.all ? kExitOk : kExitNegative;
    return res;
}

CommandResult execute(const RunConfig& cfg) {
    if (cfg.command == "sample") return cmd_sample(cfg);
    if (cfg.command == "check") return cmd_check(cfg);
    if (cfg.command == "survey") return cmd_survey(cfg);
    if (cfg.command == "bounds") return cmd_bounds(cfg);
    if (cfg.command == "classical") return cmd_classical(cfg);
    if (cfg.command == "reproduce") return cmd_reproduce(cfg);
    throw UsageError("unknown command '" + cfg.command + "'");
}

// ---------------------------------------------------------------- argv

int run(int argc, const char* const* argv) {
    CLI::App app{"qmarg: uniqueness of pure states from their reduced states"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_signature = [&](CLI::App* sub) {
        sub->add_option("--n", cfg.n, "number of parties");
        sub->add_option("--d", cfg.d, "local dimension");
        sub->add_option("--dims", cfg.dims, "comma-separated local dimensions, e.g. 4,2,2");
    };
    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", cfg.seed, "master seed"); };
    auto add_output = [&](CLI::App* sub) {
        sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--out", cfg.out, "output path (default stdout)");
    };
    auto add_tolerances = [&](CLI::App* sub) {
        sub->add_option("--tol-rank", cfg.tol_rank, "relative singular-value cutoff for the linear test");
        sub->add_option("--tol-converge", cfg.tol_converge, "Dykstra convergence tolerance");
        sub->add_option("--tol-distinct", cfg.tol_distinct, "trace distance separating distinct states");
        sub->add_option("--max-iter", cfg.max_iter, "Dykstra iteration cap per restart");
        sub->add_option("--restarts", cfg.restarts, "Dykstra restarts per state");
    };

    auto* sample = app.add_subcommand("sample", "write a Haar-random pure state");
    add_signature(sample);
    add_seed(sample);
    add_output(sample);

    auto* check = app.add_subcommand("check", "decide uniqueness for one state");
    add_signature(check);
    add_seed(check);
    add_output(check);
    add_tolerances(check);
    check->add_option("--state", cfg.state_path, "state file written by sample");
    check->add_option("--subsets", cfg.subsets, "marginal subsets, e.g. 01,02,12");
    check->add_option("--mode", cfg.mode, "linear, oracle or both");

    auto* survey = app.add_subcommand("survey", "genericity statistics over Haar samples");
    add_signature(survey);
    add_seed(survey);
    add_output(survey);
    add_tolerances(survey);
    survey->add_option("--subsets", cfg.subsets, "marginal subsets, e.g. 01,02,12");
    survey->add_option("--trials", cfg.trials, "number of samples");
    survey->add_option("--mode", cfg.mode, "oracle or linear");

    auto* bounds = app.add_subcommand("bounds", "parameter-counting bounds");
    bounds->add_option("--d", cfg.d, "local dimension");
    bounds->add_option("--d-range", cfg.d_range, "range of d, e.g. 2:10");
    bounds->add_option("--n", cfg.n, "number of parties");
    bounds->add_option("--n-range", cfg.n_range, "range of n, e.g. 1:12");
    bounds->add_option("--m", cfg.m, "largest m for the (2m+1)/(3m+1) table");
    add_output(bounds);

    auto* classical = app.add_subcommand("classical", "classical counterexample pair");
    classical->add_option("--n", cfg.n, "number of variables");
    classical->add_option("--d", cfg.d, "values per variable");
    classical->add_option("--epsilon", cfg.epsilon, "deviation size (default: half the admissible maximum)");
    classical->add_flag("--uniform", cfg.uniform, "use the uniform joint instead of a Dirichlet sample");
    add_seed(classical);
    add_output(classical);

    auto* reproduce = app.add_subcommand("reproduce", "run every check with a master seed");
    add_seed(reproduce);
    add_output(reproduce);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    cfg.command = app.get_subcommands().front()->get_name();

    CommandResult res;
    try {
        res = execute(cfg);
    } catch (const UsageError& e) {
        std::cerr << "qmarg: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "qmarg: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "qmarg: error: " << e.what() << "\n";
        return kExitUsage;
    }

    const std::string text = (cfg.format == "csv") ? res.csv : res.report.dump(2) + "\n";
    if (cfg.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(cfg.out, std::ios::binary);
        if (!out) {
            std::cerr << "qmarg: cannot write '" << cfg.out << "'\n";
            return kExitUsage;
        }
        out << text;
    }
    return res.exit_code;
}

}  // namespace qmarg::cli
