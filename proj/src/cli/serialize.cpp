#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qmarg/cli.hpp"

namespace qmarg::cli {

json state_to_json(const AmplitudeTensor& state) {
    json amps = json::array();
    for (const complex& a : state.amplitudes()) amps.push_back({a.real(), a.imag()});
    return {{"schema", kStateSchema}, {"signature", state.signature().dims()}, {"amplitudes", std::move(amps)}};
}

AmplitudeTensor state_from_json(const json& j) {
    try {
        if (j.at("schema").get<std::string>() != kStateSchema) {
            throw UsageError("unsupported state schema '" + j.at("schema").get<std::string>() + "'");
        }
        PartySignature sig(j.at("signature").get<std::vector<int>>());
        const auto& amps = j.at("amplitudes");
        if (static_cast<Index>(amps.size()) != sig.total()) {
            throw UsageError("state has " + std::to_string(amps.size()) + " amplitudes, signature needs " +
                             std::to_string(sig.total()));
        }
        Eigen::VectorXcd v(sig.total());
        for (Index i = 0; i < sig.total(); ++i) {
            const auto& pair = amps.at(static_cast<size_t>(i));
            if (pair.size() != 2) throw UsageError("amplitude entries must be [re, im] pairs");
            v[i] = complex{pair.at(0).get<double>(), pair.at(1).get<double>()};
        }
        return AmplitudeTensor(std::move(sig), std::move(v));
    } catch (const json::exception& e) {
        throw UsageError(std::string("malformed state: ") + e.what());
    } catch (const UsageError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("invalid state: ") + e.what());
    }
}

AmplitudeTensor load_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open state file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw UsageError("state file '" + path + "' is not valid JSON: " + e.what());
    }
    return state_from_json(j);
}

json matrix_to_json(const Eigen::MatrixXcd& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index k = 0; k < m.cols(); ++k) row.push_back({m(i, k).real(), m(i, k).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

int parse_int(const std::string& s, const std::string& what) {
    if (s.empty()) throw UsageError("empty " + what);
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) throw UsageError("bad " + what + " '" + s + "'");
    }
    try {
        return std::stoi(s);
    } catch (const std::out_of_range&) {
        throw UsageError(what + " out of range: '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

}  // namespace

std::vector<std::vector<int>> parse_subsets(const std::string& text, int parties) {
    if (text.empty()) throw UsageError("empty subset list");
    std::vector<std::vector<int>> out;
    for (const auto& group : split(text, ',')) {
        if (group.empty()) throw UsageError("empty subset in '" + text + "'");
        std::vector<int> sub;
        if (group.find(':') != std::string::npos) {
            for (const auto& tok : split(group, ':')) sub.push_back(parse_int(tok, "party index"));
        } else {
            for (char c : group) sub.push_back(parse_int(std::string(1, c), "party index"));
        }
        for (int p : sub) {
            if (p >= parties) {
                throw UsageError("party " + std::to_string(p) + " out of range for " + std::to_string(parties) +
                                 " parties");
            }
        }
        std::vector<int> sorted = sub;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw UsageError("repeated party in subset '" + group + "'");
        }
        out.push_back(std::move(sorted));
    }
    return out;
}

std::string format_subsets(const std::vector<std::vector<int>>& subsets) {
    bool single_digit = true;
    for (const auto& s : subsets) {
        for (int p : s) single_digit = single_digit && p < 10;
    }
    std::string out;
    for (size_t i = 0; i < subsets.size(); ++i) {
        if (i) out += ',';
        for (size_t k = 0; k < subsets[i].size(); ++k) {
            if (k && !single_digit) out += ':';
            out += std::to_string(subsets[i][k]);
        }
    }
    return out;
}

std::pair<int, int> parse_range(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() == 1) {
        const int v = parse_int(parts[0], "range bound");
        return {v, v};
    }
    if (parts.size() != 2) throw UsageError("range must be 'a:b', got '" + text + "'");
    const int lo = parse_int(parts[0], "range bound");
    const int hi = parse_int(parts[1], "range bound");
    if (lo > hi) throw UsageError("empty range '" + text + "'");
    return {lo, hi};
}

std::vector<int> parse_dims(const std::string& text) {
    std::vector<int> dims;
    for (const auto& tok : split(text, ',')) {
        const int v = parse_int(tok, "dimension");
        if (v < 2) throw UsageError("local dimensions must be >= 2");
        dims.push_back(v);
    }
    if (dims.empty()) throw UsageError("empty dimension list");
    return dims;
}

}  // namespace qmarg::cli
