#include "mtoa/harness/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "mtoa/analysis/queueing.hpp"
#include "mtoa/error.hpp"
#include "mtoa/sim/simulator.hpp"

namespace mtoa::harness {

using nlohmann::json;

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::kSimulate: return "simulate";
        case Mode::kAnalyze: return "analyze";
        case Mode::kSweep: return "sweep";
        case Mode::kCompare: return "compare";
        case Mode::kRecommend: return "recommend";
    }
    return "?";
}

Mode parse_mode(std::string_view text) {
    for (Mode m : {Mode::kSimulate, Mode::kAnalyze, Mode::kSweep, Mode::kCompare, Mode::kRecommend}) {
        if (to_string(m) == text) return m;
    }
    throw ConfigError("mode must be one of simulate|analyze|sweep|compare|recommend, got \"" +
                      std::string(text) + "\"");
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

const std::set<std::string> kTopKeys = {"mode", "scheme", "n", "T", "L", "alpha", "q_th",
                                        "m_window", "seed", "replications", "j_min", "workers",
                                        "q0", "strategy", "grid"};
const std::set<std::string> kStrategyKeys = {"m_batch", "k_cutoff", "n_capture", "q_schedule"};
const std::set<std::string> kGridKeys = {"q_min", "q_max", "q_points", "m_min",
                                         "m_max", "m_points", "n_c_values"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) throw ConfigError("unknown key \"" + where + key + "\"");
    }
}

std::uint64_t as_uint(const json& v, const std::string& key, std::uint64_t lo,
                      std::uint64_t hi = std::numeric_limits<std::uint64_t>::max()) {
    const std::string range = "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    if (v.is_number_unsigned()) {
        const auto x = v.get<std::uint64_t>();
        if (x < lo || x > hi) throw ConfigError(key + " must lie in " + range);
        return x;
    }
    if (v.is_number_integer()) throw ConfigError(key + " must lie in " + range);
    if (v.is_number_float()) {
        // Accept 1e7 and friends when they are exact integers.
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && d >= static_cast<double>(lo) &&
            d <= static_cast<double>(hi) && d < 1.8e19) {
            return static_cast<std::uint64_t>(d);
        }
        throw ConfigError(key + " must be an integer in " + range);
    }
    throw ConfigError(key + " must be an integer");
}

double as_double(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError(key + " must be a number");
    return v.get<double>();
}

double as_probability(const json& v, const std::string& key, bool allow_zero) {
    const double x = as_double(v, key);
    const bool ok = allow_zero ? (x >= 0.0 && x <= 1.0) : (x > 0.0 && x <= 1.0);
    if (!ok) throw ConfigError(key + (allow_zero ? " must lie in [0,1]" : " must lie in (0,1]"));
    return x;
}

std::optional<std::uint64_t> parse_window(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "unbounded" || s == "inf") return std::nullopt;
        throw ConfigError("m_window must be an integer >= 1 or \"unbounded\"");
    }
    return as_uint(v, "m_window", 1);
}

strategy::AccessStrategy parse_strategy(const json& obj) {
    if (!obj.is_object()) throw ConfigError("strategy must be an object");
    reject_unknown(obj, kStrategyKeys, "strategy.");
    for (const char* key : {"m_batch", "q_schedule"}) {
        if (!obj.contains(key)) throw ConfigError(std::string("strategy.") + key + " is required");
    }
    const auto m = as_uint(obj["m_batch"], "strategy.m_batch", 1);
    const auto nc = obj.contains("n_capture") ? as_uint(obj["n_capture"], "strategy.n_capture", 0, 64) : 0;
    const auto& sched = obj["q_schedule"];
    if (!sched.is_array() || sched.empty()) throw ConfigError("strategy.q_schedule must be a non-empty array");
    std::vector<double> q;
    for (const auto& x : sched) q.push_back(as_probability(x, "strategy.q_schedule[]", false));
    const auto k = obj.contains("k_cutoff") ? as_uint(obj["k_cutoff"], "strategy.k_cutoff", 0, 4096) : nc;

    strategy::AccessStrategy s;
    if (q.size() == 1 && k == nc) {
        s = strategy::make_strategy(m, nc, q.front());
    } else {
        s.batch_size = m;
        s.cutoff = k;
        s.capture_depth = nc;
        s.schedule = std::move(q);
        try {
            s.validate();
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("strategy: ") + e.what());
        }
    }
    return s;
}

tradeoff::SweepGrid parse_grid(const json& obj, std::size_t n, double horizon) {
    if (!obj.is_object()) throw ConfigError("grid must be an object");
    reject_unknown(obj, kGridKeys, "grid.");
    auto g = tradeoff::SweepGrid::defaults(n, horizon);
    const double q_min = obj.contains("q_min") ? as_probability(obj["q_min"], "grid.q_min", false) : 1e-10;
    const double q_max = obj.contains("q_max") ? as_probability(obj["q_max"], "grid.q_max", false) : 1e-1;
    const auto q_points = obj.contains("q_points") ? as_uint(obj["q_points"], "grid.q_points", 1, 100000) : 200;
    const auto m_min = obj.contains("m_min") ? as_uint(obj["m_min"], "grid.m_min", 1) : 1;
    const auto m_max = obj.contains("m_max") ? as_uint(obj["m_max"], "grid.m_max", 1) : 1000000;
    const auto m_points = obj.contains("m_points") ? as_uint(obj["m_points"], "grid.m_points", 1, 100000) : 100;
    if (q_max < q_min) throw ConfigError("grid.q_max must be >= grid.q_min");
    if (m_max < m_min) throw ConfigError("grid.m_max must be >= grid.m_min");
    g.q_values = tradeoff::log_space(q_min, q_max, q_points);
    g.m_values = tradeoff::log_space_integers(m_min, m_max, m_points);
    if (obj.contains("n_c_values")) {
        const auto& arr = obj["n_c_values"];
        if (!arr.is_array() || arr.empty()) throw ConfigError("grid.n_c_values must be a non-empty array");
        g.n_c_values.clear();
        for (const auto& x : arr) g.n_c_values.push_back(as_uint(x, "grid.n_c_values[]", 0, 64));
    }
    return g;
}

void require(const json& doc, std::initializer_list<const char*> keys, Mode mode) {
    for (const char* key : keys) {
        if (!doc.contains(key)) {
            throw ConfigError(std::string(key) + " is required in " + std::string(to_string(mode)) + " mode");
        }
    }
}

}  // namespace

ExperimentSpec parse_config(std::string_view text, const ParseOptions& options) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc, kTopKeys, "");

    ExperimentSpec spec;
    if (doc.contains("mode")) {
        if (!doc["mode"].is_string()) throw ConfigError("mode must be a string");
        spec.mode = parse_mode(doc["mode"].get<std::string>());
        if (options.mode && *options.mode != spec.mode) {
            throw ConfigError("mode: config says \"" + std::string(to_string(spec.mode)) +
                              "\" but the command line says \"" + std::string(to_string(*options.mode)) + "\"");
        }
    } else if (options.mode) {
        spec.mode = *options.mode;
    } else {
        throw ConfigError("mode is required");
    }

    auto& net = spec.network;
    net.horizon = doc.contains("T") ? as_uint(doc["T"], "T", 1, (1ULL << 62))
                                    : (options.full_scale ? kFullHorizon : kDeskHorizon);
    if (doc.contains("n")) net.n = as_uint(doc["n"], "n", 1, 1000000);
    if (doc.contains("L")) net.null_actions = as_uint(doc["L"], "L", 1);
    if (doc.contains("alpha")) net.alpha = as_double(doc["alpha"], "alpha");
    if (doc.contains("q_th")) net.q_threshold = as_double(doc["q_th"], "q_th");
    if (doc.contains("m_window")) net.reset_window = parse_window(doc["m_window"]);
    net.seed = doc.contains("seed") ? as_uint(doc["seed"], "seed", 0) : 1;
    if (doc.contains("scheme")) {
        if (!doc["scheme"].is_string()) throw ConfigError("scheme must be a string");
        net.scheme = sim::parse_scheme(doc["scheme"].get<std::string>());
    }
    if (doc.contains("replications")) {
        spec.replications = as_uint(doc["replications"], "replications", 1, 100000);
    }
    if (doc.contains("workers")) spec.workers = static_cast<unsigned>(as_uint(doc["workers"], "workers", 1, 1024));
    if (doc.contains("q0")) spec.q0 = as_probability(doc["q0"], "q0", false);
    if (doc.contains("j_min")) spec.j_min = as_probability(doc["j_min"], "j_min", true);
    if (doc.contains("strategy")) spec.strategy = parse_strategy(doc["strategy"]);
    if (doc.contains("grid")) {
        spec.grid = parse_grid(doc["grid"], net.n, static_cast<double>(net.horizon));
    }

    switch (spec.mode) {
        case Mode::kSimulate:
        case Mode::kCompare:
            require(doc, {"scheme", "n", "L"}, spec.mode);
            if (net.scheme == sim::Scheme::kMtoaL) require(doc, {"q_th"}, spec.mode);
            if (net.scheme == sim::Scheme::kMtoaG) require(doc, {"m_window"}, spec.mode);
            if (spec.strategy) throw ConfigError("strategy is only accepted in analyze mode");
            break;
        case Mode::kAnalyze:
            require(doc, {"n"}, spec.mode);
            if (!spec.strategy) {
                require(doc, {"scheme", "L"}, spec.mode);
                if (net.scheme == sim::Scheme::kMtoaL) require(doc, {"q_th"}, spec.mode);
                if (net.scheme == sim::Scheme::kMtoaG) require(doc, {"m_window"}, spec.mode);
            }
            break;
        case Mode::kSweep:
            require(doc, {"n"}, spec.mode);
            if (doc.contains("scheme")) spec.family = net.scheme;
            break;
        case Mode::kRecommend:
            require(doc, {"scheme", "n", "j_min"}, spec.mode);
            if (net.n < 2) throw ConfigError("n must be >= 2 in recommend mode");
            break;
    }
    net.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr std::array<std::string_view, 16> kColumns = {
    "scheme", "n",           "T",          "seed",   "L",      "alpha",     "q_th",           "m_window",
    "n_capture", "q_noncapture", "lambda_out", "jain", "source", "rel_error", "rel_error_jain", "status"};

std::string fmt_double(double x) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) throw InternalError("cannot format number");
    return std::string(buf.data(), end);
}

std::string fmt_uint(std::uint64_t x) {
    if (x == kUnbounded) return "inf";
    return std::to_string(x);
}

std::string opt(const std::optional<double>& x) { return x ? fmt_double(*x) : std::string(); }
std::string opt(const std::optional<std::uint64_t>& x) { return x ? fmt_uint(*x) : std::string(); }

std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::vector<std::string>> split_records(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        any = true;
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(fields));
            fields.clear();
            any = false;
        } else {
            field += c;
        }
    }
    if (quoted) throw ConfigError("csv: unterminated quoted field");
    if (any) {
        fields.push_back(std::move(field));
        records.push_back(std::move(fields));
    }
    return records;
}

double read_double(const std::string& s, std::string_view col) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("csv: bad number in column " + std::string(col) + ": \"" + s + "\"");
    }
    return x;
}

std::uint64_t read_uint(const std::string& s, std::string_view col) {
    if (s == "inf") return kUnbounded;
    std::uint64_t x = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("csv: bad integer in column " + std::string(col) + ": \"" + s + "\"");
    }
    return x;
}

std::optional<double> read_opt_double(const std::string& s, std::string_view col) {
    if (s.empty()) return std::nullopt;
    return read_double(s, col);
}

std::optional<std::uint64_t> read_opt_uint(const std::string& s, std::string_view col) {
    if (s.empty()) return std::nullopt;
    return read_uint(s, col);
}

}  // namespace

std::string_view csv_header() {
    static const std::string header = [] {
        std::string h;
        for (std::size_t i = 0; i < kColumns.size(); ++i) {
            if (i) h += ',';
            h += kColumns[i];
        }
        return h;
    }();
    return header;
}

std::string to_csv(std::span<const ReportRow> rows) {
    std::string out(csv_header());
    out += '\n';
    for (const auto& r : rows) {
        const std::array<std::string, 16> fields = {
            quote(r.scheme),     std::to_string(r.n),  fmt_uint(r.horizon), opt(r.seed),
            opt(r.null_actions), opt(r.alpha),         opt(r.q_th),         opt(r.m_window),
            opt(r.n_capture),    opt(r.q_noncapture),  opt(r.lambda_out),   opt(r.jain),
            quote(r.source),     opt(r.rel_error),     opt(r.rel_error_jain), quote(r.status)};
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += fields[i];
        }
        out += '\n';
    }
    return out;
}

std::vector<ReportRow> parse_csv(std::string_view text) {
    const auto records = split_records(text);
    if (records.empty()) throw ConfigError("csv: missing header");
    std::string header;
    for (std::size_t i = 0; i < records[0].size(); ++i) {
        if (i) header += ',';
        header += records[0][i];
    }
    if (header != csv_header()) throw ConfigError("csv: unexpected header \"" + header + "\"");
    std::vector<ReportRow> rows;
    for (std::size_t line = 1; line < records.size(); ++line) {
        const auto& f = records[line];
        if (f.size() != kColumns.size()) {
            throw ConfigError("csv: record " + std::to_string(line) + " has " + std::to_string(f.size()) +
                              " fields, expected " + std::to_string(kColumns.size()));
        }
        ReportRow r;
        r.scheme = f[0];
        r.n = static_cast<std::size_t>(read_uint(f[1], kColumns[1]));
        r.horizon = read_uint(f[2], kColumns[2]);
        r.seed = read_opt_uint(f[3], kColumns[3]);
        r.null_actions = read_opt_uint(f[4], kColumns[4]);
        r.alpha = read_opt_double(f[5], kColumns[5]);
        r.q_th = read_opt_double(f[6], kColumns[6]);
        r.m_window = read_opt_uint(f[7], kColumns[7]);
        r.n_capture = read_opt_uint(f[8], kColumns[8]);
        r.q_noncapture = read_opt_double(f[9], kColumns[9]);
        r.lambda_out = read_opt_double(f[10], kColumns[10]);
        r.jain = read_opt_double(f[11], kColumns[11]);
        r.source = f[12];
        r.rel_error = read_opt_double(f[13], kColumns[13]);
        r.rel_error_jain = read_opt_double(f[14], kColumns[14]);
        r.status = f[15];
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Sim / analysis join

namespace {

auto join_key(const ReportRow& r) {
    return std::make_tuple(r.scheme, r.n, r.horizon, r.null_actions, r.alpha, r.q_th, r.m_window);
}

std::string describe_key(const ReportRow& r) {
    std::string s = r.scheme + " n=" + std::to_string(r.n) + " T=" + fmt_uint(r.horizon);
    if (r.null_actions) s += " L=" + fmt_uint(*r.null_actions);
    if (r.alpha) s += " alpha=" + fmt_double(*r.alpha);
    if (r.q_th) s += " q_th=" + fmt_double(*r.q_th);
    if (r.m_window) s += " m_window=" + fmt_uint(*r.m_window);
    return s;
}

std::optional<double> relative_error(const std::optional<double>& sim, const std::optional<double>& ana) {
    if (!sim || !ana || *ana == 0.0) return std::nullopt;
    return std::abs(*sim - *ana) / std::abs(*ana);
}

}  // namespace

Comparison compare_sim_analysis(std::span<const ReportRow> sim_rows, std::span<const ReportRow> analysis_rows) {
    Comparison out;
    std::map<decltype(join_key(ReportRow{})), const ReportRow*> index;
    for (const auto& a : analysis_rows) index.emplace(join_key(a), &a);
    std::set<const ReportRow*> used;
    for (const auto& s : sim_rows) {
        auto it = index.find(join_key(s));
        if (it == index.end()) {
            out.diagnostics.push_back("no analysis row for " + describe_key(s));
            continue;
        }
        used.insert(it->second);
        const ReportRow& a = *it->second;
        if (!a.ok() || !s.ok()) {
            out.diagnostics.push_back("not compared (failed cell) for " + describe_key(s) + ": " +
                                      (a.ok() ? s.status : a.status));
            continue;
        }
        ReportRow joined = s;
        joined.rel_error = relative_error(s.lambda_out, a.lambda_out);
        joined.rel_error_jain = relative_error(s.jain, a.jain);
        out.joined.push_back(std::move(joined));
    }
    for (const auto& a : analysis_rows) {
        if (!used.contains(&a)) out.diagnostics.push_back("no simulation row for " + describe_key(a));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

struct SimSummary {
    double mean_lambda = 0.0;
    double se_lambda = 0.0;
    std::optional<double> mean_jain;
    std::optional<double> se_jain;
};

double standard_error(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
}

std::optional<std::uint64_t> capture_column(const ExperimentSpec& spec) {
    const auto& net = spec.network;
    if (net.scheme == sim::Scheme::kMtoaG) return 0;
    const auto depth = strategy::capture_depth(net.alpha, net.q_threshold, spec.q0);
    return depth ? *depth : kUnbounded;
}

ReportRow scheme_row(const ExperimentSpec& spec, std::string source) {
    const auto& net = spec.network;
    ReportRow r;
    r.scheme = std::string(sim::to_string(net.scheme));
    r.n = net.n;
    r.horizon = net.horizon;
    r.null_actions = net.null_actions;
    r.alpha = net.alpha;
    if (net.scheme == sim::Scheme::kMtoaL) {
        r.q_th = net.q_threshold;
    } else {
        r.m_window = net.reset_window.value_or(kUnbounded);
    }
    r.n_capture = capture_column(spec);
    r.q_noncapture = 1.0 / (static_cast<double>(net.null_actions) + 1.0);
    r.source = std::move(source);
    return r;
}

std::vector<sim::RunMetrics> run_replications(const ExperimentSpec& spec) {
    std::vector<sim::RunMetrics> runs(spec.replications);
    std::vector<std::exception_ptr> failures(spec.replications);
    auto work = [&](std::size_t i) {
        try {
            auto cfg = spec.network;
            cfg.seed = spec.network.seed + i;
            runs[i] = sim::run_replication(cfg);
        } catch (...) {
            failures[i] = std::current_exception();
        }
    };
    const unsigned pool = std::max(1u, std::min<unsigned>(spec.workers, static_cast<unsigned>(spec.replications)));
    if (pool == 1) {
        for (std::size_t i = 0; i < spec.replications; ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < pool; ++w) {
            threads.emplace_back([&] {
                for (std::size_t i = next++; i < spec.replications; i = next++) work(i);
            });
        }
        for (auto& t : threads) t.join();
    }
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return runs;
}

std::vector<ReportRow> simulate_rows(const ExperimentSpec& spec, SimSummary& summary) {
    const auto runs = run_replications(spec);
    std::vector<ReportRow> rows;
    std::vector<double> lambdas;
    std::vector<double> jains;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        auto r = scheme_row(spec, "sim");
        r.seed = spec.network.seed + i;
        r.lambda_out = runs[i].lambda_out_hat;
        r.jain = runs[i].jain;
        lambdas.push_back(runs[i].lambda_out_hat);
        if (runs[i].jain) jains.push_back(*runs[i].jain);
        rows.push_back(std::move(r));
    }
    auto mean_of = [](const std::vector<double>& xs) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s / static_cast<double>(xs.size());
    };
    summary.mean_lambda = mean_of(lambdas);
    summary.se_lambda = standard_error(lambdas, summary.mean_lambda);
    if (!jains.empty()) {
        summary.mean_jain = mean_of(jains);
        summary.se_jain = standard_error(jains, *summary.mean_jain);
    }
    auto mean_row = scheme_row(spec, "sim");
    mean_row.lambda_out = summary.mean_lambda;
    mean_row.jain = summary.mean_jain;
    rows.push_back(std::move(mean_row));
    return rows;
}

struct AnalysisOutcome {
    ReportRow row;
    std::optional<analysis::Evaluation> evaluation;
    bool numerical_failure = false;
};

AnalysisOutcome analysis_row(const ExperimentSpec& spec, bool config_errors_are_fatal) {
    AnalysisOutcome out;
    const auto& net = spec.network;
    strategy::AccessStrategy s;
    if (spec.strategy) {
        s = *spec.strategy;
        out.row.scheme = "custom";
        out.row.n = net.n;
        out.row.horizon = net.horizon;
        out.row.m_window = s.batch_size;
        out.row.n_capture = s.capture_depth;
        out.row.q_noncapture = s.noncapture_q();
        out.row.source = "analysis";
    } else {
        out.row = scheme_row(spec, "analysis");
        try {
            s = net.scheme == sim::Scheme::kMtoaL
                    ? strategy::derive_strategy_mtoa_l(net.null_actions, net.alpha, net.q_threshold, spec.q0)
                    : strategy::derive_strategy_mtoa_g(net.null_actions, net.reset_window);
        } catch (const ConfigError& e) {
            if (config_errors_are_fatal) throw;
            out.row.status = std::string("error: ") + e.what();
            return out;
        }
    }
    try {
        auto e = analysis::evaluate(s, net.n, static_cast<double>(net.horizon));
        out.row.lambda_out = e.throughput;
        out.row.jain = std::max(e.fairness, 1.0 / static_cast<double>(net.n));
        out.evaluation = e;
    } catch (const NumericalError& e) {
        out.row.status = std::string("error: ") + e.what();
        out.numerical_failure = true;
    }
    return out;
}

json evaluation_json(const analysis::Evaluation& e) {
    return {{"throughput", e.throughput},
            {"fairness", e.fairness},
            {"d_bar", e.moments.d_bar},
            {"sigma2", e.moments.sigma2},
            {"q_tilde", e.fixed_point.q_tilde},
            {"p_c", e.fixed_point.p_c},
            {"p_nc", e.fixed_point.p_nc},
            {"beta_nc", e.fixed_point.beta_nc},
            {"solver_iterations", e.fixed_point.iterations},
            {"solver_residual", e.fixed_point.residual}};
}

json sim_json(const SimSummary& s) {
    json j = {{"replications_mean_lambda_out", s.mean_lambda}, {"lambda_out_stderr", s.se_lambda}};
    j["mean_jain"] = s.mean_jain ? json(*s.mean_jain) : json(nullptr);
    j["jain_stderr"] = s.se_jain ? json(*s.se_jain) : json(nullptr);
    return j;
}

ReportRow point_row(const ExperimentSpec& spec, const tradeoff::TradeoffPoint& p, const std::string& scheme) {
    ReportRow r;
    r.scheme = scheme;
    r.n = spec.network.n;
    r.horizon = spec.network.horizon;
    if (scheme == "mtoa-g") r.null_actions = spec.network.n - 1;
    r.m_window = p.params.batch_size;
    r.n_capture = p.params.capture_depth;
    r.q_noncapture = p.params.q_noncapture;
    r.source = "analysis";
    if (p.ok()) {
        r.lambda_out = p.throughput;
        r.jain = p.fairness;
    } else {
        r.status = "error: " + *p.error;
    }
    return r;
}

void execute_sweep(const ExperimentSpec& spec, ExperimentResult& result) {
    const auto& net = spec.network;
    auto grid = spec.grid ? *spec.grid : tradeoff::SweepGrid::defaults(net.n, static_cast<double>(net.horizon));
    grid.n = net.n;
    grid.horizon = static_cast<double>(net.horizon);
    std::string label = "grid";
    if (spec.family) {
        label = std::string(sim::to_string(*spec.family));
        if (*spec.family == sim::Scheme::kMtoaG) {
            // L = n - 1, window swept.
            grid.q_values = {1.0 / static_cast<double>(net.n)};
            grid.n_c_values = {0};
        } else {
            // Two capture states, single-packet batches, q = 1/(L+1) swept.
            grid.m_values = {1};
            grid.n_c_values = {2};
        }
    }
    auto points = tradeoff::sweep_tradeoff(grid, spec.workers);
    if (spec.family && spec.j_min) {
        // The floor usually binds between two grid cells; add the point found
        // by integer bisection on L (MTOA-L) or on the window (MTOA-G).
        try {
            tradeoff::TradeoffPoint p;
            const double horizon = static_cast<double>(net.horizon);
            if (*spec.family == sim::Scheme::kMtoaG) {
                const auto rec = tradeoff::recommend_mtoa_g(net.n, horizon, *spec.j_min);
                p.params = {1.0 / static_cast<double>(net.n), rec.reset_window, 0, 0};
                p.throughput = rec.throughput;
                p.fairness = rec.fairness;
            } else {
                const auto rec = tradeoff::recommend_mtoa_l(net.n, horizon, *spec.j_min);
                p.params = {1.0 / (static_cast<double>(rec.null_actions) + 1.0), 1, 2, 2};
                p.throughput = rec.throughput;
                p.fairness = rec.fairness;
            }
            points.push_back(p);
        } catch (const InfeasibleError& e) {
            result.diagnostics.push_back(e.what());
        }
    }
    const auto frontier = tradeoff::pareto_frontier(points);
    std::size_t failures = 0;
    for (const auto& p : frontier) result.rows.push_back(point_row(spec, p, label));
    for (const auto& p : points) {
        if (!p.ok()) {
            ++failures;
            result.rows.push_back(point_row(spec, p, label));
        }
    }
    if (failures > 0) {
        result.numerical_failure = true;
        result.diagnostics.push_back(std::to_string(failures) + " grid cells failed");
    }
    result.summary["cells"] = points.size();
    result.summary["frontier_points"] = frontier.size();
    result.summary["failed_cells"] = failures;
    if (spec.j_min && !frontier.empty()) {
        try {
            const auto best = tradeoff::max_throughput_under_fairness(frontier, *spec.j_min);
            result.summary["max_throughput_under_fairness"] = {
                {"j_min", *spec.j_min},
                {"throughput", best.throughput},
                {"fairness", best.fairness},
                {"q_noncapture", best.params.q_noncapture},
                {"m_batch", best.params.batch_size},
                {"n_capture", best.params.capture_depth}};
        } catch (const InfeasibleError& e) {
            result.summary["max_throughput_under_fairness"] = nullptr;
            result.diagnostics.push_back(e.what());
        }
    }
}

void execute_recommend(const ExperimentSpec& spec, ExperimentResult& result) {
    const auto& net = spec.network;
    const double horizon = static_cast<double>(net.horizon);
    ReportRow r;
    r.scheme = std::string(sim::to_string(net.scheme));
    r.n = net.n;
    r.horizon = net.horizon;
    r.source = "analysis";
    if (net.scheme == sim::Scheme::kMtoaL) {
        const auto rec = tradeoff::recommend_mtoa_l(net.n, horizon, *spec.j_min);
        r.null_actions = rec.null_actions;
        r.alpha = rec.alpha;
        r.q_th = rec.q_threshold;
        r.n_capture = rec.capture_depth;
        r.q_noncapture = 1.0 / (static_cast<double>(rec.null_actions) + 1.0);
        r.lambda_out = rec.throughput;
        r.jain = rec.fairness;
        result.summary["recommendation"] = {{"alpha", rec.alpha},
                                            {"q_th", rec.q_threshold},
                                            {"L", rec.null_actions},
                                            {"throughput", rec.throughput},
                                            {"fairness", rec.fairness}};
    } else {
        const auto rec = tradeoff::recommend_mtoa_g(net.n, horizon, *spec.j_min);
        r.null_actions = rec.null_actions;
        r.m_window = rec.reset_window;
        r.n_capture = 0;
        r.q_noncapture = 1.0 / static_cast<double>(net.n);
        r.lambda_out = rec.throughput;
        r.jain = rec.fairness;
        result.summary["recommendation"] = {{"L", rec.null_actions},
                                            {"m_window", rec.reset_window},
                                            {"throughput", rec.throughput},
                                            {"fairness", rec.fairness}};
    }
    result.rows.push_back(std::move(r));
}

}  // namespace

ExperimentResult execute(const ExperimentSpec& spec) {
    if (spec.replications < 1) throw ConfigError("replications must be >= 1");
    spec.network.validate();
    ExperimentResult result;
    result.summary = json::object();
    result.summary["mode"] = std::string(to_string(spec.mode));
    switch (spec.mode) {
        case Mode::kSimulate: {
            SimSummary s;
            result.rows = simulate_rows(spec, s);
            result.summary["simulation"] = sim_json(s);
            break;
        }
        case Mode::kAnalyze: {
            auto a = analysis_row(spec, true);
            result.numerical_failure = a.numerical_failure;
            if (!a.row.ok()) result.diagnostics.push_back(a.row.status);
            if (a.evaluation) result.summary["analysis"] = evaluation_json(*a.evaluation);
            result.rows.push_back(std::move(a.row));
            break;
        }
        case Mode::kCompare: {
            SimSummary s;
            auto sim_rows = simulate_rows(spec, s);
            auto a = analysis_row(spec, false);
            result.numerical_failure = a.numerical_failure;
            const std::array<ReportRow, 1> analysis_rows = {a.row};
            auto cmp = compare_sim_analysis(sim_rows, analysis_rows);
            // Matched rows carry relative errors; failed cells keep theirs empty.
            std::size_t j = 0;
            for (auto& row : sim_rows) {
                if (j < cmp.joined.size() && join_key(cmp.joined[j]) == join_key(row) &&
                    cmp.joined[j].seed == row.seed) {
                    row = cmp.joined[j++];
                }
            }
            result.rows = std::move(sim_rows);
            result.rows.push_back(a.row);
            result.diagnostics = std::move(cmp.diagnostics);
            result.summary["simulation"] = sim_json(s);
            if (a.evaluation) result.summary["analysis"] = evaluation_json(*a.evaluation);
            const auto& mean = result.rows[result.rows.size() - 2];
            result.summary["mean_rel_error"] = mean.rel_error ? json(*mean.rel_error) : json(nullptr);
            result.summary["mean_rel_error_jain"] =
                mean.rel_error_jain ? json(*mean.rel_error_jain) : json(nullptr);
            break;
        }
        case Mode::kSweep:
            execute_sweep(spec, result);
            break;
        case Mode::kRecommend:
            if (!spec.j_min) throw ConfigError("j_min is required in recommend mode");
            execute_recommend(spec, result);
            break;
    }
    result.summary["rows"] = result.rows.size();
    result.summary["diagnostics"] = result.diagnostics;
    return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.output_path.empty()) throw ConfigError("output path is required");
    auto result = execute(spec);
    auto write = [](const std::string& path, const std::string& content) {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open " + path + " for writing");
        f << content;
        f.close();
        if (!f) throw Error("failed writing " + path);
    };
    write(spec.output_path, to_csv(result.rows));
    if (spec.summary_path) write(*spec.summary_path, result.summary.dump(2) + "\n");
    return result;
}

}  // namespace mtoa::harness
