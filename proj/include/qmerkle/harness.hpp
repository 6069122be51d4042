#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qmerkle/attacks.hpp"
#include "qmerkle/prng.hpp"
#include "qmerkle/protocols.hpp"

namespace qmerkle::harness {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Monte-Carlo sweep description. Loadable from JSON with exactly these
/// field names; unknown keys are rejected.
struct ExperimentConfig {
    protocols::ProtocolKind kind = protocols::ProtocolKind::merkle1974;
    std::vector<std::size_t> N_list;
    std::size_t k = 2;
    std::size_t trials = 1;
    std::uint64_t base_seed = 0;
    bool attack = false;
    std::string out;             // empty = stdout
    std::string format = "csv";  // csv | json | markdown
    std::string plot;            // optional SVG path

    void validate() const {
        if (trials < 1) throw ConfigError("config: trials must be at least 1");
        if (N_list.empty()) throw ConfigError("config: N_list must not be empty");
        for (std::size_t i = 1; i < N_list.size(); ++i)
            if (N_list[i] <= N_list[i - 1])
                throw ConfigError("config: N_list must be strictly increasing");
        if (format != "csv" && format != "json" && format != "markdown")
            throw ConfigError("config: unknown format " + format);
    }

    static ExperimentConfig from_json(const nlohmann::json& j) {
        static const std::vector<std::string> known{"kind",      "N_list", "k",
                                                    "trials",    "base_seed", "attack",
                                                    "out",       "format", "plot"};
        for (auto it = j.begin(); it != j.end(); ++it)
            if (std::find(known.begin(), known.end(), it.key()) == known.end())
                throw ConfigError("config: unknown key " + it.key());

        ExperimentConfig cfg;
        if (!j.contains("kind") || !j.contains("N_list"))
            throw ConfigError("config: kind and N_list are required");
        try {
            cfg.kind = protocols::kind_from_name(j.at("kind").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        cfg.N_list = j.at("N_list").get<std::vector<std::size_t>>();
        if (j.contains("k")) cfg.k = j.at("k").get<std::size_t>();
        if (j.contains("trials")) cfg.trials = j.at("trials").get<std::size_t>();
        if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
        if (j.contains("attack")) cfg.attack = j.at("attack").get<bool>();
        if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
        if (j.contains("format")) cfg.format = j.at("format").get<std::string>();
        if (j.contains("plot")) cfg.plot = j.at("plot").get<std::string>();
        cfg.validate();
        return cfg;
    }

    static ExperimentConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config: parse error: ") + e.what());
        }
        return from_json(j);
    }
};

struct ResultsRow {
    std::string kind;
    std::size_t N = 0;
    std::size_t k = 0;
    std::size_t trial = 0;
    std::uint64_t alice_f = 0, alice_t = 0;
    std::uint64_t bob_f = 0, bob_t = 0;
    double charged_bob = 0.0;
    std::uint64_t eve_f = 0, eve_t = 0;
    bool success = false;
    std::uint64_t seed = 0;

    friend bool operator==(const ResultsRow&, const ResultsRow&) = default;
};

using ResultsTable = std::vector<ResultsRow>;

/// Per-trial seed derivation; the README documents the mixing chain so
/// external reimplementations can reproduce tables bit-exactly.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t N, std::size_t trial) {
    return derive_seed(base_seed, N, trial);
}

/// Runs one configured trial; rows are independent across (N, trial).
inline ResultsRow run_trial(const ExperimentConfig& cfg, std::size_t N, std::size_t trial) {
    protocols::ProtocolConfig pc{cfg.kind, N, cfg.k, trial_seed(cfg.base_seed, N, trial)};
    auto transcript = protocols::run_protocol(pc);

    ResultsRow row;
    row.kind = protocols::kind_name(cfg.kind);
    row.N = N;
    row.k = pc.uses_group() ? cfg.k : 1;
    row.trial = trial;
    row.alice_f = transcript.ledger.alice.f;
    row.alice_t = transcript.ledger.alice.t;
    row.bob_f = transcript.ledger.bob.f;
    row.bob_t = transcript.ledger.bob.t;
    row.charged_bob = transcript.charged_bob_queries;
    row.success = transcript.success;
    row.seed = pc.seed;

    if (cfg.attack) {
        auto oracle = pc.make_oracle();
        auto view = protocols::PublicView::from(transcript);
        auto result = cfg.kind == protocols::ProtocolKind::merkle1974
                          ? attacks::eve_merkle_classical(view, oracle)
                          : attacks::eve_hidden_ksum_classical(view, oracle);
        attacks::score_against(result, transcript.bob_key);
        row.eve_f = result.eve_ledger.f;
        row.eve_t = result.eve_ledger.t;
    }
    return row;
}

inline ResultsTable run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ResultsTable table;
    table.reserve(cfg.N_list.size() * cfg.trials);
    for (std::size_t N : cfg.N_list)
        for (std::size_t trial = 0; trial < cfg.trials; ++trial)
            table.push_back(run_trial(cfg, N, trial));
    std::sort(table.begin(), table.end(), [](const ResultsRow& a, const ResultsRow& b) {
        return std::tie(a.N, a.trial) < std::tie(b.N, b.trial);
    });
    return table;
}

// ---- scaling regression ----

inline double column_value(const ResultsRow& row, const std::string& column) {
    if (column == "alice_f") return double(row.alice_f);
    if (column == "alice_t") return double(row.alice_t);
    if (column == "bob_f") return double(row.bob_f);
    if (column == "bob_t") return double(row.bob_t);
    if (column == "charged_bob") return row.charged_bob;
    if (column == "eve_f") return double(row.eve_f);
    if (column == "eve_t") return double(row.eve_t);
    if (column == "legit_f") return double(row.alice_f + row.bob_f);
    throw ConfigError("fit: unknown column " + column);
}

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double ci95 = 0.0; // half-width on the slope
};

/// Ordinary least squares of log(mean(column)) against log(N).
inline ScalingFit fit_scaling(const ResultsTable& table, const std::string& column) {
    std::map<std::size_t, std::pair<double, std::size_t>> by_n;
    for (const auto& row : table) {
        auto& [sum, count] = by_n[row.N];
        sum += column_value(row, column);
        ++count;
    }
    if (by_n.size() < 3)
        throw std::invalid_argument("fit_scaling: need at least 3 distinct N values");

    std::vector<double> xs, ys;
    for (const auto& [n, agg] : by_n) {
        const double mean = agg.first / double(agg.second);
        if (mean <= 0.0)
            throw std::invalid_argument("fit_scaling: non-positive mean in column");
        xs.push_back(std::log(double(n)));
        ys.push_back(std::log(mean));
    }

    const std::size_t count = xs.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < count; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / double(count), my = sy / double(count);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < count; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }

    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += e * e;
    }
    fit.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
    if (count > 2) {
        const double se = std::sqrt(ss_res / double(count - 2) / sxx);
        fit.ci95 = 1.96 * se;
    }
    return fit;
}

// ---- emission ----

inline std::string double_repr(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

inline const char* kColumnHeader =
    "kind,N,k,trial,alice_f,alice_t,bob_f,bob_t,charged_bob,eve_f,eve_t,success,seed";

inline std::string to_csv(const ResultsTable& table) {
    std::string out = kColumnHeader;
    out.push_back('\n');
    for (const auto& r : table) {
        out += r.kind;
        out += ',' + std::to_string(r.N) + ',' + std::to_string(r.k) + ',' +
               std::to_string(r.trial) + ',' + std::to_string(r.alice_f) + ',' +
               std::to_string(r.alice_t) + ',' + std::to_string(r.bob_f) + ',' +
               std::to_string(r.bob_t) + ',' + double_repr(r.charged_bob) + ',' +
               std::to_string(r.eve_f) + ',' + std::to_string(r.eve_t) + ',' +
               (r.success ? "1" : "0") + ',' + std::to_string(r.seed);
        out.push_back('\n');
    }
    return out;
}

inline ResultsTable from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("csv: empty input");
    if (line != kColumnHeader) throw ConfigError("csv: unexpected header");

    ResultsTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            auto comma = line.find(',', start);
            parts.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (parts.size() != 13) throw ConfigError("csv: malformed row");
        ResultsRow r;
        r.kind = parts[0];
        r.N = std::stoull(parts[1]);
        r.k = std::stoull(parts[2]);
        r.trial = std::stoull(parts[3]);
        r.alice_f = std::stoull(parts[4]);
        r.alice_t = std::stoull(parts[5]);
        r.bob_f = std::stoull(parts[6]);
        r.bob_t = std::stoull(parts[7]);
        r.charged_bob = std::stod(parts[8]);
        r.eve_f = std::stoull(parts[9]);
        r.eve_t = std::stoull(parts[10]);
        r.success = parts[11] == "1";
        r.seed = std::stoull(parts[12]);
        table.push_back(r);
    }
    return table;
}

inline nlohmann::json table_to_json(const ResultsTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table)
        rows.push_back({{"kind", r.kind},
                        {"N", r.N},
                        {"k", r.k},
                        {"trial", r.trial},
                        {"alice_f", r.alice_f},
                        {"alice_t", r.alice_t},
                        {"bob_f", r.bob_f},
                        {"bob_t", r.bob_t},
                        {"charged_bob", r.charged_bob},
                        {"eve_f", r.eve_f},
                        {"eve_t", r.eve_t},
                        {"success", r.success},
                        {"seed", r.seed}});
    return rows;
}

inline std::string to_markdown(const ResultsTable& table) {
    std::string out =
        "| kind | N | k | trial | alice_f | alice_t | bob_f | bob_t | charged_bob "
        "| eve_f | eve_t | success | seed |\n"
        "|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : table) {
        out += "| " + r.kind + " | " + std::to_string(r.N) + " | " + std::to_string(r.k) +
               " | " + std::to_string(r.trial) + " | " + std::to_string(r.alice_f) +
               " | " + std::to_string(r.alice_t) + " | " + std::to_string(r.bob_f) +
               " | " + std::to_string(r.bob_t) + " | " + double_repr(r.charged_bob) +
               " | " + std::to_string(r.eve_f) + " | " + std::to_string(r.eve_t) + " | " +
               (r.success ? "1" : "0") + " | " + std::to_string(r.seed) + " |\n";
    }
    return out;
}

/// Log-log query-count plot: one polyline per party series, static SVG,
/// no timestamps so identical inputs emit identical bytes.
inline std::string to_svg_plot(const ResultsTable& table) {
    std::map<std::size_t, std::array<std::pair<double, std::size_t>, 4>> agg;
    for (const auto& r : table) {
        auto& slots = agg[r.N];
        slots[0].first += double(r.alice_f + r.alice_t);
        slots[0].second++;
        slots[1].first += double(r.bob_f + r.bob_t) + r.charged_bob;
        slots[1].second++;
        if (r.eve_f + r.eve_t > 0) {
            slots[2].first += double(r.eve_f + r.eve_t);
            slots[2].second++;
        }
    }

    struct Series {
        std::string name;
        std::string color;
        std::vector<std::pair<double, double>> points; // (N, mean)
    };
    std::vector<Series> series{{"alice", "#1f77b4", {}},
                               {"bob", "#2ca02c", {}},
                               {"eve", "#d62728", {}}};
    for (const auto& [n, slots] : agg)
        for (std::size_t s = 0; s < 3; ++s)
            if (slots[s].second > 0 && slots[s].first > 0)
                series[s].points.emplace_back(double(n),
                                              slots[s].first / double(slots[s].second));

    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            min_x = std::min(min_x, std::log10(x));
            max_x = std::max(max_x, std::log10(x));
            min_y = std::min(min_y, std::log10(y));
            max_y = std::max(max_y, std::log10(y));
        }
    if (min_x > max_x) {
        min_x = 0;
        max_x = 1;
        min_y = 0;
        max_y = 1;
    }
    if (max_x - min_x < 1e-9) max_x = min_x + 1;
    if (max_y - min_y < 1e-9) max_y = min_y + 1;

    const double width = 640, height = 480, margin = 60;
    auto sx = [&](double x) {
        return margin + (std::log10(x) - min_x) / (max_x - min_x) * (width - 2 * margin);
    };
    auto sy = [&](double y) {
        return height - margin -
               (std::log10(y) - min_y) / (max_y - min_y) * (height - 2 * margin);
    };

    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\">\n"
        "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n"
        "<text x=\"320\" y=\"470\" text-anchor=\"middle\">log N</text>\n"
        "<text x=\"15\" y=\"240\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
        "240)\">log queries</text>\n";
    for (const auto& s : series) {
        if (s.points.empty()) continue;
        svg += "<polyline class=\"series\" id=\"" + s.name + "\" fill=\"none\" stroke=\"" +
               s.color + "\" stroke-width=\"2\" points=\"";
        for (auto [x, y] : s.points)
            svg += double_repr(sx(x)) + "," + double_repr(sy(y)) + " ";
        svg += "\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

/// Renders the table in the requested format; writes the optional plot.
inline std::string emit_report(const ResultsTable& table, const std::string& format,
                               const std::string& plot_path = {}) {
    std::string rendered;
    if (format == "csv")
        rendered = to_csv(table);
    else if (format == "json")
        rendered = table_to_json(table).dump(2) + "\n";
    else if (format == "markdown")
        rendered = to_markdown(table);
    else
        throw ConfigError("emit_report: unknown format " + format);
    if (!plot_path.empty()) write_file(plot_path, to_svg_plot(table));
    return rendered;
}

} // namespace qmerkle::harness
