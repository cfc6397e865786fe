#include "atriareg/report.hpp"

#include <array>
#include <charconv>
#include <system_error>

#include <json.hpp>

#include "atriareg/error.hpp"
#include "atriareg/fileio.hpp"

namespace atriareg {

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string metrics_csv(std::span<const PhaseEvaluation> evals) {
    if (evals.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no evaluations to write");
    }
    std::string out = kMetricsCsvHeader;
    out += '\n';
    for (const PhaseEvaluation &e : evals) {
        out += std::to_string(e.phase);
        for (double v : {e.dice, e.hausdorff_mm, e.gt_volume_ml, e.warped_volume_ml, e.mean_jacobian}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

void write_metrics_csv(std::span<const PhaseEvaluation> evals, const std::filesystem::path &path) {
    write_file_atomic(path, metrics_csv(evals));
}

namespace {

template <class T> T parse_field(std::string_view s, std::size_t line) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw Error(ErrorCode::IoFailure,
                    "metrics CSV line " + std::to_string(line) + ": cannot parse '" + std::string(s) + "'");
    }
    return v;
}

} // namespace

std::vector<PhaseEvaluation> parse_metrics_csv(std::string_view text) {
    std::vector<PhaseEvaluation> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line_no == 1) {
            if (line != kMetricsCsvHeader) {
                throw Error(ErrorCode::IoFailure, "metrics CSV header mismatch");
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        std::array<std::string_view, 6> cols;
        std::size_t n = 0;
        for (std::size_t start = 0;; ++n) {
            const std::size_t comma = line.find(',', start);
            if (n < cols.size()) {
                cols[n] = line.substr(start, comma == std::string_view::npos ? comma : comma - start);
            }
            if (comma == std::string_view::npos) {
                ++n;
                break;
            }
            start = comma + 1;
        }
        if (n != cols.size()) {
            throw Error(ErrorCode::IoFailure, "metrics CSV line " + std::to_string(line_no) + ": expected 6 columns");
        }
        PhaseEvaluation e;
        e.phase = parse_field<int>(cols[0], line_no);
        e.dice = parse_field<double>(cols[1], line_no);
        e.hausdorff_mm = parse_field<double>(cols[2], line_no);
        e.gt_volume_ml = parse_field<double>(cols[3], line_no);
        e.warped_volume_ml = parse_field<double>(cols[4], line_no);
        e.mean_jacobian = parse_field<double>(cols[5], line_no);
        out.push_back(e);
    }
    if (line_no == 0) {
        throw Error(ErrorCode::IoFailure, "metrics CSV is empty");
    }
    return out;
}

std::vector<PhaseEvaluation> read_metrics_csv(const std::filesystem::path &path) {
    return parse_metrics_csv(read_file(path));
}

std::string loss_trace_json(std::span<const RegistrationResult> results, const RegistrationConfig &cfg) {
    using nlohmann::json;
    json doc;
    doc["config"] = {
        {"lambda", cfg.lambda},
        {"levels", cfg.levels},
        {"max_iters_per_level", cfg.max_iters_per_level},
        {"step_size", cfg.step_size},
        {"stop_rel_tol", cfg.stop_rel_tol},
        {"stop_window", cfg.stop_window},
        {"seed", cfg.seed},
        {"warm_start", cfg.warm_start},
        {"similarity", cfg.similarity == SimilarityKind::MeanSquaredError ? "mse" : "ncc"},
    };
    json phases = json::array();
    for (std::size_t t = 0; t < results.size(); ++t) {
        const RegistrationResult &r = results[t];
        json trace = json::array();
        for (const LossBreakdown &l : r.loss_trace) {
            trace.push_back({{"similarity", l.similarity}, {"bending", l.bending}, {"total", l.total}});
        }
        phases.push_back({{"phase", t},
                          {"iterations_per_level", r.iterations_used},
                          {"converged", r.converged},
                          {"trace", std::move(trace)}});
    }
    doc["phases"] = std::move(phases);
    return doc.dump(1) + "\n";
}

void write_loss_trace(std::span<const RegistrationResult> results, const RegistrationConfig &cfg,
                      const std::filesystem::path &path) {
    write_file_atomic(path, loss_trace_json(results, cfg));
}

} // namespace atriareg
