#include "fedstop/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <utility>

#include "fedstop/errors.hpp"

namespace fedstop {

namespace fs = std::filesystem;

namespace {

constexpr const char* kRoundsHeader =
    "run_id,seed,round,delta,growth,kappa,train_loss,val_loss,val_acc,test_acc,"
    "datafree_stop,val_stop,wall_ms";
constexpr int kRoundsFields = 13;

constexpr const char* kSummaryHeader =
    "run_id,seed,config_hash,method,skew,c,tau,rho,status,last_round,r_star_datafree,"
    "r_star_val_loss,r_star_val_acc,oracle_round,oracle_acc,acc_at_datafree_stop,"
    "best_acc_until_datafree_stop,acc_at_val_loss_stop,acc_at_val_acc_stop,delta_acc,"
    "delta_rounds,error";
constexpr int kSummaryFields = 22;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string cell(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }
std::string cell(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

// Error strings may carry commas; the CSV stays quote-free by design.
std::string sanitize(std::string s) {
    for (char& ch : s) {
        if (ch == ',') ch = ';';
        if (ch == '\n' || ch == '\r') ch = ' ';
    }
    return s;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : line) {
        if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

[[noreturn]] void bad_row(int line_no, const std::string& what) {
    throw IoError("csv line " + std::to_string(line_no) + ": " + what);
}

double parse_double_field(const std::string& s, int line_no) {
    if (s.empty()) bad_row(line_no, "empty numeric field");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) bad_row(line_no, "bad numeric field '" + s + "'");
    return v;
}

long long parse_int_field(const std::string& s, int line_no) {
    if (s.empty()) bad_row(line_no, "empty integer field");
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size()) bad_row(line_no, "bad integer field '" + s + "'");
    return v;
}

std::optional<double> parse_opt_double(const std::string& s, int line_no) {
    if (s.empty()) return std::nullopt;
    return parse_double_field(s, line_no);
}

std::optional<int> parse_opt_int(const std::string& s, int line_no) {
    if (s.empty()) return std::nullopt;
    return static_cast<int>(parse_int_field(s, line_no));
}

bool parse_bool_field(const std::string& s, int line_no) {
    if (s == "0") return false;
    if (s == "1") return true;
    bad_row(line_no, "bad boolean field '" + s + "'");
}

// Split into lines, dropping a trailing empty line; header must match.
std::vector<std::string> csv_lines(const std::string& text, const char* header,
                                   const std::string& what) {
    std::vector<std::string> lines;
    std::string cur;
    for (const char ch : text) {
        if (ch == '\n') {
            lines.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) lines.push_back(std::move(cur));
    if (lines.empty() || lines.front() != header)
        throw IoError(what + ": missing or unrecognized header");
    return lines;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream f(path, mode);
    if (!f) throw IoError("cannot write '" + path.string() + "'");
    return f;
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

}  // namespace

std::string rounds_csv_header() { return kRoundsHeader; }
std::string summary_csv_header() { return kSummaryHeader; }

std::string to_csv_row(const RoundRecord& r) {
    std::ostringstream os;
    os << r.run_id << ',' << r.seed << ',' << r.round << ',' << fmt17(r.delta) << ','
       << cell(r.growth) << ',' << r.kappa << ',' << fmt17(r.train_loss) << ','
       << cell(r.val_loss) << ',' << cell(r.val_acc) << ',' << cell(r.test_acc) << ','
       << (r.datafree_stop ? 1 : 0) << ',' << (r.val_stop ? 1 : 0) << ',' << fmt17(r.wall_ms);
    return os.str();
}

std::string to_csv_row(const RunSummary& s) {
    std::ostringstream os;
    os << s.run_id << ',' << s.seed << ',' << s.cfg_hash << ',' << method_name(s.method) << ','
       << skew_name(s.skew) << ',' << fmt17(s.skew_c) << ',' << fmt17(s.tau) << ',' << s.rho << ','
       << status_name(s.status) << ',' << s.last_round << ',' << cell(s.r_star_datafree) << ','
       << cell(s.r_star_val_loss) << ',' << cell(s.r_star_val_acc) << ','
       << cell(s.oracle_round) << ',' << cell(s.oracle_acc) << ','
       << cell(s.acc_at_datafree_stop) << ',' << cell(s.best_acc_until_datafree_stop) << ','
       << cell(s.acc_at_val_loss_stop) << ',' << cell(s.acc_at_val_acc_stop) << ','
       << cell(s.delta_acc) << ',' << cell(s.delta_rounds) << ',' << sanitize(s.error);
    return os.str();
}

std::vector<RoundRecord> parse_rounds_csv(const std::string& text) {
    const auto lines = csv_lines(text, kRoundsHeader, "rounds.csv");
    std::vector<RoundRecord> out;
    out.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const int ln = static_cast<int>(i + 1);
        const auto f = split_fields(lines[i]);
        if (static_cast<int>(f.size()) != kRoundsFields)
            bad_row(ln, "expected " + std::to_string(kRoundsFields) + " fields, got " +
                            std::to_string(f.size()));
        RoundRecord r;
        r.run_id = f[0];
        r.seed = static_cast<std::uint64_t>(parse_int_field(f[1], ln));
        r.round = static_cast<int>(parse_int_field(f[2], ln));
        r.delta = parse_double_field(f[3], ln);
        r.growth = parse_opt_double(f[4], ln);
        r.kappa = static_cast<int>(parse_int_field(f[5], ln));
        r.train_loss = parse_double_field(f[6], ln);
        r.val_loss = parse_opt_double(f[7], ln);
        r.val_acc = parse_opt_double(f[8], ln);
        r.test_acc = parse_opt_double(f[9], ln);
        r.datafree_stop = parse_bool_field(f[10], ln);
        r.val_stop = parse_bool_field(f[11], ln);
        r.wall_ms = parse_double_field(f[12], ln);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RunSummary> parse_summary_csv(const std::string& text) {
    const auto lines = csv_lines(text, kSummaryHeader, "summary.csv");
    std::vector<RunSummary> out;
    out.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const int ln = static_cast<int>(i + 1);
        const auto f = split_fields(lines[i]);
        if (static_cast<int>(f.size()) != kSummaryFields)
            bad_row(ln, "expected " + std::to_string(kSummaryFields) + " fields, got " +
                            std::to_string(f.size()));
        RunSummary s;
        s.run_id = f[0];
        s.seed = static_cast<std::uint64_t>(parse_int_field(f[1], ln));
        s.cfg_hash = f[2];
        s.method = method_from_name(f[3]);
        s.skew = skew_from_name(f[4]);
        s.skew_c = parse_double_field(f[5], ln);
        s.tau = parse_double_field(f[6], ln);
        s.rho = static_cast<int>(parse_int_field(f[7], ln));
        s.status = status_from_name(f[8]);
        s.last_round = static_cast<int>(parse_int_field(f[9], ln));
        s.r_star_datafree = parse_opt_int(f[10], ln);
        s.r_star_val_loss = parse_opt_int(f[11], ln);
        s.r_star_val_acc = parse_opt_int(f[12], ln);
        s.oracle_round = parse_opt_int(f[13], ln);
        s.oracle_acc = parse_opt_double(f[14], ln);
        s.acc_at_datafree_stop = parse_opt_double(f[15], ln);
        s.best_acc_until_datafree_stop = parse_opt_double(f[16], ln);
        s.acc_at_val_loss_stop = parse_opt_double(f[17], ln);
        s.acc_at_val_acc_stop = parse_opt_double(f[18], ln);
        s.delta_acc = parse_opt_double(f[19], ln);
        s.delta_rounds = parse_opt_int(f[20], ln);
        s.error = f[21];
        out.push_back(std::move(s));
    }
    return out;
}

std::string comparison_table(const std::vector<RunSummary>& summaries) {
    if (summaries.empty()) throw ConfigError("comparison table: no run summaries");

    struct Agg {
        std::string method, skew, c, tau;
        int rho = 0;
        int runs = 0, failed = 0, scored = 0;
        double stop_r = 0, acc_stop = 0, best_val = 0, oracle = 0, d_acc = 0, d_rounds = 0;
    };
    std::vector<Agg> cells;  // first-appearance order

    for (const RunSummary& s : summaries) {
        const std::string method = method_name(s.method);
        const std::string skew = skew_name(s.skew);
        const std::string c = fmt("%g", s.skew_c);
        const std::string tau = fmt("%g", s.tau);
        Agg* agg = nullptr;
        for (Agg& a : cells) {
            if (a.method == method && a.skew == skew && a.c == c && a.tau == tau && a.rho == s.rho) {
                agg = &a;
                break;
            }
        }
        if (!agg) {
            cells.push_back(Agg{method, skew, c, tau, s.rho, 0, 0, 0, 0, 0, 0, 0, 0, 0});
            agg = &cells.back();
        }
        ++agg->runs;
        if (s.status == RunStatus::Failed) {
            ++agg->failed;
            continue;
        }
        std::optional<double> best_val;
        if (s.acc_at_val_loss_stop) best_val = *s.acc_at_val_loss_stop;
        if (s.acc_at_val_acc_stop && (!best_val || *s.acc_at_val_acc_stop > *best_val))
            best_val = *s.acc_at_val_acc_stop;
        if (!s.acc_at_datafree_stop || !best_val || !s.oracle_acc || !s.delta_acc ||
            !s.delta_rounds)
            continue;
        ++agg->scored;
        agg->stop_r += s.r_star_datafree.value_or(s.last_round);
        agg->acc_stop += *s.acc_at_datafree_stop;
        agg->best_val += *best_val;
        agg->oracle += *s.oracle_acc;
        agg->d_acc += *s.delta_acc;
        agg->d_rounds += *s.delta_rounds;
    }

    std::ostringstream os;
    os << std::left << std::setw(10) << "method" << std::setw(14) << "skew" << std::right
       << std::setw(8) << "c" << std::setw(9) << "tau" << std::setw(5) << "rho" << std::setw(6)
       << "runs" << std::setw(6) << "fail" << std::setw(10) << "stop_r" << std::setw(10)
       << "acc_stop" << std::setw(10) << "best_val" << std::setw(11) << "oracle_acc"
       << std::setw(9) << "d_acc" << std::setw(10) << "d_rounds" << '\n';
    for (const Agg& a : cells) {
        os << std::left << std::setw(10) << a.method << std::setw(14) << a.skew << std::right
           << std::setw(8) << a.c << std::setw(9) << a.tau << std::setw(5) << a.rho << std::setw(6)
           << a.runs << std::setw(6) << a.failed;
        if (a.scored > 0) {
            const double n = a.scored;
            os << std::setw(10) << fmt("%.2f", a.stop_r / n) << std::setw(10)
               << fmt("%.4f", a.acc_stop / n) << std::setw(10) << fmt("%.4f", a.best_val / n)
               << std::setw(11) << fmt("%.4f", a.oracle / n) << std::setw(9)
               << fmt("%+.4f", a.d_acc / n) << std::setw(10) << fmt("%.2f", a.d_rounds / n);
        } else {
            for (const int w : {10, 10, 10, 11, 9, 10}) os << std::setw(w) << "-";
        }
        os << '\n';
    }
    return os.str();
}

void write_f64(const ParameterVector& v, const std::string& path) {
    auto f = open_out(path, std::ios::out | std::ios::binary);
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!f) throw IoError("short write to '" + path + "'");
}

ParameterVector read_f64(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw IoError("cannot read '" + path + "'");
    const auto bytes = static_cast<std::size_t>(f.tellg());
    if (bytes % sizeof(double) != 0)
        throw IoError("'" + path + "' is not a stream of 8-byte doubles");
    ParameterVector v(bytes / sizeof(double));
    f.seekg(0);
    f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
    if (!f) throw IoError("short read from '" + path + "'");
    return v;
}

namespace {

// One pair of two-column series files per run: test accuracy on the eval
// cadence and the growth-rate trace from round 2 on.
void write_series(const std::vector<RoundRecord>& records, const fs::path& series_dir) {
    std::error_code ec;
    fs::create_directories(series_dir, ec);
    if (ec) throw IoError("cannot create '" + series_dir.string() + "': " + ec.message());

    std::vector<std::string> order;
    for (const RoundRecord& r : records)
        if (order.empty() || order.back() != r.run_id) {
            bool seen = false;
            for (const std::string& id : order) seen = seen || id == r.run_id;
            if (!seen) order.push_back(r.run_id);
        }
    for (const std::string& id : order) {
        auto acc = open_out(series_dir / (id + ".acc.csv"));
        auto growth = open_out(series_dir / (id + ".growth.csv"));
        acc << "round,test_acc\n";
        growth << "round,growth\n";
        for (const RoundRecord& r : records) {
            if (r.run_id != id) continue;
            if (r.test_acc) acc << r.round << ',' << fmt17(*r.test_acc) << '\n';
            if (r.growth) growth << r.round << ',' << fmt17(*r.growth) << '\n';
        }
    }
}

}  // namespace

void write_outputs(const std::vector<RunResult>& runs, const std::string& out_dir,
                   const std::string& config_json) {
    if (runs.empty()) throw ConfigError("write_outputs: no runs");
    bool any_records = false;
    for (const RunResult& r : runs) any_records = any_records || !r.records.empty();
    if (!any_records) throw ConfigError("write_outputs: empty round stream");

    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

    std::vector<RoundRecord> all_records;
    std::vector<RunSummary> all_summaries;
    for (const RunResult& r : runs) {
        all_summaries.push_back(r.summary);
        all_records.insert(all_records.end(), r.records.begin(), r.records.end());
    }

    {
        auto f = open_out(dir / "rounds.csv");
        f << kRoundsHeader << '\n';
        for (const RoundRecord& r : all_records) f << to_csv_row(r) << '\n';
    }
    {
        auto f = open_out(dir / "summary.csv");
        f << kSummaryHeader << '\n';
        for (const RunSummary& s : all_summaries) f << to_csv_row(s) << '\n';
    }
    open_out(dir / "comparison.txt") << comparison_table(all_summaries);
    if (!config_json.empty()) open_out(dir / "config.json") << config_json;

    write_series(all_records, dir / "series");

    for (const RunResult& r : runs) {
        if (r.snapshots.empty()) continue;
        const fs::path snap_dir = dir / "snapshots" / r.summary.run_id;
        fs::create_directories(snap_dir, ec);
        if (ec) throw IoError("cannot create '" + snap_dir.string() + "': " + ec.message());
        for (const auto& [round, params] : r.snapshots)
            write_f64(params, (snap_dir / ("r" + std::to_string(round) + ".f64")).string());
    }
}

std::string regenerate_report(const std::string& dir) {
    const fs::path base(dir);
    const auto rounds = parse_rounds_csv(read_file(base / "rounds.csv"));
    const auto summaries = parse_summary_csv(read_file(base / "summary.csv"));
    if (rounds.empty()) throw ConfigError("report: empty round stream");

    const std::string table = comparison_table(summaries);
    open_out(base / "comparison.txt") << table;
    write_series(rounds, base / "series");
    return table;
}

}  // namespace fedstop
