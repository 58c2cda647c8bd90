#include "sbsa/io.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "sbsa/errors.hpp"

namespace sbsa {

namespace {

std::string trim(std::string_view v) {
    const char* ws = " \t\r\n";
    const auto b = v.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = v.find_last_not_of(ws);
    return std::string(v.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

// Strict full-field parse; leading '+' tolerated, locale-independent.
bool parse_double(std::string_view field, double& out) {
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [p, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && p == last;
}

bool parse_index(std::string_view field, std::size_t& out) {
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    unsigned long long v = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) return false;
    out = static_cast<std::size_t>(v);
    return true;
}

std::string loc(const std::string& path, long line) {
    return path + ":" + std::to_string(line) + ": ";
}

struct ContentRow {
    long line = 0;
    std::vector<std::string> fields;
};

// All non-empty, non-comment rows with their 1-based physical line numbers.
std::vector<ContentRow> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open '" + path + "'");
    std::vector<ContentRow> rows;
    std::string line;
    long ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        rows.push_back({ln, split_fields(t)});
    }
    return rows;
}

bool all_numeric(const std::vector<std::string>& fields) {
    double v;
    for (const auto& f : fields)
        if (!parse_double(f, v)) return false;
    return true;
}

double parse_sample(const std::string& path, const ContentRow& row,
                    std::size_t col) {
    double v;
    if (!parse_double(row.fields[col], v))
        throw input_error(loc(path, row.line) + "cannot parse '" +
                          row.fields[col] + "' as a number");
    if (!std::isfinite(v))
        throw input_error(loc(path, row.line) + "non-finite value '" +
                          row.fields[col] + "'");
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write '" + path + "'");
    return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw input_error("write failed on '" + path + "'");
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Signal load_signal(const std::string& path, double rate_hz,
                   std::vector<std::string>* warnings) {
    const auto rows = read_rows(path);

    std::size_t data_cols = 0;
    std::size_t header_cols = 0;
    std::vector<double> time, value;
    std::vector<long> sample_line;

    for (const auto& row : rows) {
        if (data_cols == 0 && header_cols == 0 && !all_numeric(row.fields)) {
            if (row.fields.size() < 1 || row.fields.size() > 2)
                throw input_error(loc(path, row.line) +
                                  "expected 1 or 2 columns, got " +
                                  std::to_string(row.fields.size()));
            header_cols = row.fields.size();
            continue;
        }
        if (data_cols == 0) {
            data_cols = row.fields.size();
            if (data_cols < 1 || data_cols > 2)
                throw input_error(loc(path, row.line) +
                                  "expected 1 or 2 columns, got " +
                                  std::to_string(data_cols));
            if (header_cols != 0 && header_cols != data_cols)
                throw input_error(loc(path, row.line) + "row has " +
                                  std::to_string(data_cols) +
                                  " columns but the header has " +
                                  std::to_string(header_cols));
        } else if (row.fields.size() != data_cols) {
            throw input_error(loc(path, row.line) + "expected " +
                              std::to_string(data_cols) + " columns, got " +
                              std::to_string(row.fields.size()));
        }
        if (data_cols == 2) {
            time.push_back(parse_sample(path, row, 0));
            value.push_back(parse_sample(path, row, 1));
        } else {
            value.push_back(parse_sample(path, row, 0));
        }
        sample_line.push_back(row.line);
    }

    if (value.empty()) throw input_error("'" + path + "': no data rows");
    if (value.size() < 3)
        throw input_error("'" + path + "': need at least 3 samples, got " +
                          std::to_string(value.size()));

    if (data_cols == 1) {
        if (rate_hz <= 0.0)
            throw input_error("'" + path +
                              "' has a single column; a sample rate is "
                              "required to place it on a time axis");
        return make_signal(std::move(value), 1.0 / rate_hz, 0.0);
    }

    if (rate_hz > 0.0 && warnings)
        warnings->push_back("ignoring the given sample rate: '" + path +
                            "' carries its own time column");

    for (std::size_t i = 1; i < time.size(); ++i)
        if (time[i] <= time[i - 1])
            throw input_error(loc(path, sample_line[i]) +
                              "time not strictly increasing (" +
                              format_double(time[i]) + " after " +
                              format_double(time[i - 1]) + ")");

    const std::size_t n = time.size();
    std::vector<double> dts(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) dts[i] = time[i + 1] - time[i];
    std::vector<double> sorted = dts;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    const double dt_med = sorted[sorted.size() / 2];

    double max_rel = 0.0;
    for (const double d : dts)
        max_rel = std::max(max_rel, std::abs(d - dt_med) / dt_med);

    if (max_rel <= 1e-6) {
        // Uniform grid; average away rounding wobble in the stored stamps.
        const double dt = (time.back() - time.front()) / double(n - 1);
        return make_signal(std::move(value), dt, time.front());
    }

    const double t0 = time.front();
    const double span = time.back() - t0;
    std::size_t n_out = static_cast<std::size_t>(
                            std::floor(span / dt_med * (1.0 + 1e-12))) +
                        1;
    n_out = std::max<std::size_t>(n_out, 3);
    std::vector<double> res(n_out);
    std::size_t j = 0;
    for (std::size_t k = 0; k < n_out; ++k) {
        const double t = std::min(t0 + double(k) * dt_med, time.back());
        while (j + 2 < n && time[j + 1] < t) ++j;
        const double w = (t - time[j]) / (time[j + 1] - time[j]);
        res[k] = value[j] + w * (value[j + 1] - value[j]);
    }
    if (warnings)
        warnings->push_back("'" + path + "': timestamps are non-uniform; " +
                            std::to_string(n) + " rows resampled onto " +
                            std::to_string(n_out) +
                            " uniform samples at dt = " + format_double(dt_med) +
                            " s");
    return make_signal(std::move(res), dt_med, t0);
}

void save_signal_csv(const std::string& path, const Signal& s,
                     const std::string& value_header) {
    auto out = open_out(path);
    out << "time_s," << value_header << '\n';
    for (std::size_t i = 0; i < s.size(); ++i)
        out << format_double(s.time_at(i)) << ',' << format_double(s.samples[i])
            << '\n';
    finish_out(out, path);
}

void save_xy_csv(const std::string& path, const std::string& x_header,
                 const std::string& y_header, const std::vector<double>& x,
                 const std::vector<double>& y) {
    if (x.size() != y.size())
        throw input_error("save_xy_csv: column lengths differ (" +
                          std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
    auto out = open_out(path);
    out << x_header << ',' << y_header << '\n';
    for (std::size_t i = 0; i < x.size(); ++i)
        out << format_double(x[i]) << ',' << format_double(y[i]) << '\n';
    finish_out(out, path);
}

std::vector<std::size_t> load_annotations(const std::string& path) {
    const auto rows = read_rows(path);
    std::vector<std::size_t> out;
    bool saw_header = false;
    for (const auto& row : rows) {
        if (row.fields.size() != 1)
            throw input_error(loc(path, row.line) +
                              "expected a single index column, got " +
                              std::to_string(row.fields.size()) + " fields");
        std::size_t idx;
        if (!parse_index(row.fields[0], idx)) {
            if (out.empty() && !saw_header) { // tolerate one header row
                saw_header = true;
                continue;
            }
            throw input_error(loc(path, row.line) + "cannot parse '" +
                              row.fields[0] + "' as a sample index");
        }
        out.push_back(idx);
    }
    if (out.empty())
        throw input_error("'" + path + "': no beat-onset indices");
    return out;
}

void save_beat_records_csv(const std::string& path,
                           const std::vector<BeatRecord>& records) {
    auto out = open_out(path);
    out << kBeatCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.beat_index << ',' << format_double(r.pi_ms) << ','
            << format_double(r.sbp) << ',' << format_double(r.dbp) << ','
            << format_double(r.mbp) << ',' << format_double(r.pp) << ','
            << format_double(r.lambda1_abs) << ','
            << format_double(r.lambda2_abs) << ','
            << format_double(r.invariants.inv1_global) << ','
            << format_double(r.invariants.inv1_systolic) << ','
            << format_double(r.invariants.inv1_diastolic) << ','
            << format_double(r.invariants.inv2_global) << ','
            << format_double(r.invariants.inv2_systolic) << ','
            << format_double(r.invariants.inv2_diastolic) << ','
            << format_double(r.chi_hat) << ',' << r.n_chi << '\n';
    }
    finish_out(out, path);
}

std::vector<BeatRecord> load_beat_records_csv(const std::string& path) {
    const auto rows = read_rows(path);
    if (rows.empty())
        throw input_error("'" + path + "': empty beat table");

    // Reassemble the header row and insist on the exact schema.
    std::string header;
    for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
        if (i) header += ',';
        header += rows[0].fields[i];
    }
    if (header != kBeatCsvHeader)
        throw input_error(loc(path, rows[0].line) + "expected header '" +
                          std::string(kBeatCsvHeader) + "', got '" + header +
                          "'");

    std::vector<BeatRecord> records;
    records.reserve(rows.size() - 1);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto& row = rows[k];
        if (row.fields.size() != 16)
            throw input_error(loc(path, row.line) + "expected 16 columns, got " +
                              std::to_string(row.fields.size()));
        BeatRecord r;
        if (!parse_index(row.fields[0], r.beat_index))
            throw input_error(loc(path, row.line) + "cannot parse '" +
                              row.fields[0] + "' as a beat index");
        r.pi_ms = parse_sample(path, row, 1);
        r.sbp = parse_sample(path, row, 2);
        r.dbp = parse_sample(path, row, 3);
        r.mbp = parse_sample(path, row, 4);
        r.pp = parse_sample(path, row, 5);
        r.lambda1_abs = parse_sample(path, row, 6);
        r.lambda2_abs = parse_sample(path, row, 7);
        r.invariants.inv1_global = parse_sample(path, row, 8);
        r.invariants.inv1_systolic = parse_sample(path, row, 9);
        r.invariants.inv1_diastolic = parse_sample(path, row, 10);
        r.invariants.inv2_global = parse_sample(path, row, 11);
        r.invariants.inv2_systolic = parse_sample(path, row, 12);
        r.invariants.inv2_diastolic = parse_sample(path, row, 13);
        r.chi_hat = parse_sample(path, row, 14);
        if (!parse_index(row.fields[15], r.n_chi))
            throw input_error(loc(path, row.line) + "cannot parse '" +
                              row.fields[15] + "' as a component count");
        r.pi_flagged = !pi_interval_plausible(r.pi_ms);
        records.push_back(std::move(r));
    }
    return records;
}

namespace {

void apply_config_key(RunConfig& rc, const std::string& key,
                      const std::string& val, const std::string& where) {
    const auto need_double = [&] {
        double v;
        if (!parse_double(val, v) || !std::isfinite(v))
            throw input_error(where + "cannot parse '" + val +
                              "' as a number for '" + key + "'");
        return v;
    };
    const auto need_size = [&] {
        std::size_t v;
        if (!parse_index(val, v))
            throw input_error(where + "cannot parse '" + val +
                              "' as a non-negative integer for '" + key + "'");
        return v;
    };

    if (key == "chi_mode") {
        if (val == "error_target")
            rc.chi.mode = ChiMode::ErrorTarget;
        else if (val == "fixed_n")
            rc.chi.mode = ChiMode::FixedComponentCount;
        else
            throw input_error(where + "chi_mode must be 'error_target' or "
                                      "'fixed_n', got '" +
                              val + "'");
    } else if (key == "chi_target_n") {
        rc.chi.target_n = static_cast<int>(need_size());
    } else if (key == "chi_mse_tolerance") {
        rc.chi.mse_tolerance = need_double();
    } else if (key == "chi_min") {
        rc.chi.chi_min = need_double();
    } else if (key == "chi_max") {
        rc.chi.chi_max = need_double();
    } else if (key == "chi_max_iterations") {
        rc.chi.max_iterations = static_cast<int>(need_size());
    } else if (key == "n_s") {
        rc.n_s = need_size();
    } else if (key == "seg_threshold_fraction") {
        rc.segmentation.threshold_fraction = need_double();
    } else if (key == "seg_refractory_s") {
        rc.segmentation.refractory_s = need_double();
    } else if (key == "seg_foot_lookback_s") {
        rc.segmentation.foot_lookback_s = need_double();
    } else if (key == "seg_min_samples") {
        rc.segmentation.min_samples = need_size();
    } else if (key == "annotations") {
        rc.annotations_path = val; // empty = slope-based detection
    } else if (key == "predictor") {
        if (val == "lambda1")
            rc.predictor = Predictor::Lambda1;
        else if (val == "sbp")
            rc.predictor = Predictor::SBP;
        else if (val == "pp")
            rc.predictor = Predictor::PP;
        else
            throw input_error(where + "predictor must be 'lambda1', 'sbp' or "
                                      "'pp', got '" +
                              val + "'");
    } else if (key == "output_dir") {
        if (val.empty())
            throw input_error(where + "output_dir must not be empty");
        rc.output_dir = val;
    } else if (key == "seed") {
        unsigned long long v = 0;
        const char* first = val.data();
        const char* last = val.data() + val.size();
        auto [p, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || p != last)
            throw input_error(where + "cannot parse '" + val +
                              "' as a seed for 'seed'");
        rc.seed = v;
    } else if (key == "rate_hz") {
        rc.rate_hz = need_double();
    } else {
        throw input_error(where + "unknown key '" + key + "'");
    }
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open '" + path + "'");
    RunConfig rc;
    std::string line;
    long ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw input_error(loc(path, ln) + "expected 'key = value', got '" +
                              t + "'");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string val = trim(std::string_view(t).substr(eq + 1));
        if (key.empty())
            throw input_error(loc(path, ln) + "missing key before '='");
        if (val.empty() && key != "annotations")
            throw input_error(loc(path, ln) + "empty value for '" + key + "'");
        apply_config_key(rc, key, val, loc(path, ln));
    }
    return rc;
}

std::string default_run_config_text() {
    return R"(# sbsa run configuration. Every key is optional and listed here at its
# default; '#' starts a comment.

# chi selection. error_target grows chi until the relative reconstruction
# error falls below chi_mse_tolerance; fixed_n searches for the smallest chi
# whose decomposition has exactly chi_target_n components.
chi_mode = error_target
chi_target_n = 7
chi_mse_tolerance = 0.001
chi_min = 0.01
chi_max = 1000000
chi_max_iterations = 60

# number of fast components assigned to the systolic phase
n_s = 3

# beat segmentation (used when no annotation file is given)
seg_threshold_fraction = 0.5
seg_refractory_s = 0.25
seg_foot_lookback_s = 0.35
seg_min_samples = 16

# beat-onset annotation file, one sample index per line; empty means
# slope-based detection
annotations =

# predictor paired with the next pulse interval: lambda1, sbp or pp
predictor = lambda1

# directory for reports and plot files
output_dir = .

# seed for synthetic generation
seed = 1

# sample rate in Hz for single-column inputs (0 = input must carry time)
rate_hz = 0
)";
}

} // namespace sbsa
