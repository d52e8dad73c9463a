#include "threatbench/pipeline/report.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "threatbench/core/dataset.hpp"
#include "threatbench/core/error.hpp"

namespace threatbench::pipeline {

namespace {

nlohmann::json stats_json(const NumericStats& s) {
    return {{"mean", s.mean},     {"std", s.std}, {"min", s.min},  {"q25", s.q25},
            {"median", s.median}, {"q75", s.q75}, {"max", s.max}};
}

NumericStats stats_from(const nlohmann::json& d) {
    return {d.at("mean").get<double>(),   d.at("std").get<double>(), d.at("min").get<double>(),
            d.at("q25").get<double>(),    d.at("median").get<double>(),
            d.at("q75").get<double>(),    d.at("max").get<double>()};
}

nlohmann::json column_json(const ColumnSummary& c) {
    nlohmann::json d = {{"name", c.name}, {"kind", std::string(to_string(c.kind))}};
    d["stats"] = c.stats ? stats_json(*c.stats) : nlohmann::json(nullptr);
    d["counts"] = c.counts;
    return d;
}

ColumnSummary column_from(const nlohmann::json& d) {
    ColumnSummary c;
    c.name = d.at("name").get<std::string>();
    c.kind = column_kind_from_string(d.at("kind").get<std::string>());
    if (!d.at("stats").is_null()) c.stats = stats_from(d.at("stats"));
    c.counts = d.at("counts").get<std::map<std::string, std::size_t>>();
    return c;
}

nlohmann::json histogram_json(const FeatureHistogram& h) {
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& b : h.bins) {
        bins.push_back({{"lower", b.lower}, {"upper", b.upper}, {"count", b.count}});
    }
    return {{"feature", h.feature}, {"bins", bins}};
}

FeatureHistogram histogram_from(const nlohmann::json& d) {
    FeatureHistogram h;
    h.feature = d.at("feature").get<std::string>();
    for (const auto& b : d.at("bins")) {
        h.bins.push_back({b.at("lower").get<double>(), b.at("upper").get<double>(),
                          b.at("count").get<std::size_t>()});
    }
    return h;
}

nlohmann::json model_json(const ModelBlock& m) {
    nlohmann::json d;
    d["name"] = m.name;
    d["metrics"] = evalx::to_json(m.metrics);
    d["threshold"] = m.threshold ? m.threshold->to_json() : nlohmann::json(nullptr);
    d["calibration"] = m.calibration ? m.calibration->to_json() : nlohmann::json(nullptr);
    d["importance_metric"] = m.importance_metric;
    auto& imp = d["importances"] = nlohmann::json::array();
    for (const auto& f : m.importances) imp.push_back(evalx::to_json(f));
    d["model_file"] = m.model_file;
    d["training"] = m.training;
    return d;
}

ModelBlock model_from(const nlohmann::json& d) {
    ModelBlock m;
    m.name = d.at("name").get<std::string>();
    m.metrics = evalx::metrics_from_json(d.at("metrics"));
    if (!d.at("threshold").is_null()) {
        m.threshold = neural::AnomalyThreshold::from_json(d.at("threshold"));
    }
    if (!d.at("calibration").is_null()) {
        m.calibration = linear::CalibratorSpec::from_json(d.at("calibration"));
    }
    m.importance_metric = d.at("importance_metric").get<std::string>();
    for (const auto& f : d.at("importances")) m.importances.push_back(evalx::importance_from_json(f));
    m.model_file = d.at("model_file").get<std::string>();
    m.training = d.at("training");
    return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out) throw DataError("failed writing " + path.string());
}

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace

nlohmann::json to_json(const RunReport& r) {
    nlohmann::json d;
    d["schema_version"] = r.schema_version;
    d["toolkit_version"] = r.toolkit_version;
    d["domain"] = r.domain;
    d["config"] = r.config;

    const auto& ds = r.dataset;
    nlohmann::json dataset = {{"unit", ds.unit},
                              {"rows", ds.rows},
                              {"positives", ds.positives},
                              {"train_rows", ds.train_rows},
                              {"train_positives", ds.train_positives},
                              {"test_rows", ds.test_rows},
                              {"test_positives", ds.test_positives}};
    auto& cols = dataset["columns"] = nlohmann::json::array();
    for (const auto& c : ds.columns) cols.push_back(column_json(c));
    auto& hists = dataset["histograms"] = nlohmann::json::array();
    for (const auto& h : ds.histograms) hists.push_back(histogram_json(h));
    d["dataset"] = dataset;

    auto& models = d["models"] = nlohmann::json::array();
    for (const auto& m : r.models) models.push_back(model_json(m));
    d["stages"] = r.stages;
    auto& audit = d["leakage_audit"] = nlohmann::json::array();
    for (const auto& a : r.leakage_audit) {
        audit.push_back({{"stage", a.stage},
                         {"rows_consumed", a.rows_consumed},
                         {"test_rows_consumed", a.test_rows_consumed}});
    }
    auto& arts = d["artifacts"] = nlohmann::json::array();
    for (const auto& a : r.artifacts) {
        arts.push_back({{"name", a.name}, {"path", a.path}, {"digest", a.digest}});
    }
    auto& flagged = d["flagged_sessions"] = nlohmann::json::array();
    for (const auto& f : r.flagged_sessions) {
        flagged.push_back(
            {{"user_id", f.user_id}, {"day", f.day}, {"error", f.error}, {"label", f.label}});
    }
    return d;
}

RunReport report_from_json(const nlohmann::json& d) {
    try {
        RunReport r;
        r.schema_version = d.at("schema_version").get<int>();
        if (r.schema_version != kReportSchemaVersion) {
            throw DataError("unsupported report schema version " + std::to_string(r.schema_version));
        }
        r.toolkit_version = d.at("toolkit_version").get<std::string>();
        r.domain = d.at("domain").get<std::string>();
        r.config = d.at("config");
        const auto& ds = d.at("dataset");
        r.dataset.unit = ds.at("unit").get<std::string>();
        r.dataset.rows = ds.at("rows").get<std::size_t>();
        r.dataset.positives = ds.at("positives").get<std::size_t>();
        r.dataset.train_rows = ds.at("train_rows").get<std::size_t>();
        r.dataset.train_positives = ds.at("train_positives").get<std::size_t>();
        r.dataset.test_rows = ds.at("test_rows").get<std::size_t>();
        r.dataset.test_positives = ds.at("test_positives").get<std::size_t>();
        for (const auto& c : ds.at("columns")) r.dataset.columns.push_back(column_from(c));
        for (const auto& h : ds.at("histograms")) r.dataset.histograms.push_back(histogram_from(h));
        for (const auto& m : d.at("models")) r.models.push_back(model_from(m));
        r.stages = d.at("stages").get<std::vector<std::string>>();
        for (const auto& a : d.at("leakage_audit")) {
            r.leakage_audit.push_back({a.at("stage").get<std::string>(),
                                       a.at("rows_consumed").get<std::size_t>(),
                                       a.at("test_rows_consumed").get<std::size_t>()});
        }
        for (const auto& a : d.at("artifacts")) {
            r.artifacts.push_back({a.at("name").get<std::string>(), a.at("path").get<std::string>(),
                                   a.at("digest").get<std::string>()});
        }
        for (const auto& f : d.at("flagged_sessions")) {
            r.flagged_sessions.push_back({f.at("user_id").get<int>(), f.at("day").get<int>(),
                                          f.at("error").get<double>(), f.at("label").get<int>()});
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
}

bool operator==(const RunReport& a, const RunReport& b) { return to_json(a) == to_json(b); }

std::string format_summary(const RunReport& r) {
    std::ostringstream out;
    const auto& ds = r.dataset;
    out << "threatbench " << r.toolkit_version << " run report (schema " << r.schema_version
        << ")\n";
    out << "domain: " << r.domain << "\n";
    if (r.config.contains("seed")) out << "seed: " << r.config["seed"].dump() << "\n";
    out << "\n";
    out << "dataset: " << ds.rows << " " << ds.unit << "s, " << ds.positives << " positive\n";
    out << "train:   " << ds.train_rows << " (" << ds.train_positives << " positive)\n";
    out << "test:    " << ds.test_rows << " (" << ds.test_positives << " positive)\n\n";

    char line[256];
    std::snprintf(line, sizeof line, "%-22s %9s %9s %9s %9s %9s %9s\n", "model", "accuracy",
                  "precision", "recall", "f1", "macro_f1", "roc_auc");
    out << line;
    for (const auto& m : r.models) {
        const auto& x = m.metrics;
        std::snprintf(line, sizeof line, "%-22s %9s %9s %9s %9s %9s %9s\n", m.name.c_str(),
                      fixed(x.accuracy).c_str(), fixed(x.positive.precision).c_str(),
                      fixed(x.positive.recall).c_str(), fixed(x.positive.f1).c_str(),
                      fixed(x.macro_f1).c_str(), x.roc_auc ? fixed(*x.roc_auc).c_str() : "-");
        out << line;
    }
    for (const auto& m : r.models) {
        const auto& cm = m.metrics.confusion;
        out << "\n" << m.name << "\n";
        out << "  confusion: tp=" << cm.tp << " fp=" << cm.fp << " fn=" << cm.fn
            << " tn=" << cm.tn << "\n";
        out << "  " << m.metrics.negative_class << ": precision "
            << fixed(m.metrics.negative.precision) << " recall "
            << fixed(m.metrics.negative.recall) << " f1 " << fixed(m.metrics.negative.f1) << "\n";
        if (m.threshold) {
            out << "  threshold: " << fixed(m.threshold->value, 6) << " (p"
                << fixed(m.threshold->percentile, 1) << " of " << m.threshold->sample_size
                << ")\n";
        }
        if (m.calibration) {
            out << "  calibration: A=" << fixed(m.calibration->A, 6)
                << " B=" << fixed(m.calibration->B, 6) << "\n";
        }
        if (!m.importances.empty()) {
            out << "  top features (" << m.importance_metric << " drop):\n";
            for (const auto& f : m.importances) {
                out << "    " << f.feature << "  " << fixed(f.importance, 5) << " +/- "
                    << fixed(f.std, 5) << "\n";
            }
        }
    }
    out << "\nstages: ";
    for (std::size_t i = 0; i < r.stages.size(); ++i) out << (i ? " -> " : "") << r.stages[i];
    out << "\n";
    std::size_t leaked = 0;
    for (const auto& a : r.leakage_audit) leaked += a.test_rows_consumed;
    out << "leakage audit: " << r.leakage_audit.size() << " fit stages, " << leaked
        << " test rows consumed\n";
    if (!r.flagged_sessions.empty()) {
        out << "flagged sessions: " << r.flagged_sessions.size() << "\n";
    }
    return out.str();
}

std::vector<std::filesystem::path> emit_report(const RunReport& report,
                                               const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create output directory " + out_dir.string());

    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        const auto path = out_dir / name;
        write_text(path, text);
        written.push_back(path);
    };
    emit("report.json", to_json(report).dump(2) + "\n");
    emit("summary.txt", format_summary(report));

    std::ostringstream hist;
    hist << "feature,bin,lower,upper,count\n";
    for (const auto& h : report.dataset.histograms) {
        for (std::size_t b = 0; b < h.bins.size(); ++b) {
            hist << h.feature << "," << b << "," << format_double(h.bins[b].lower) << ","
                 << format_double(h.bins[b].upper) << "," << h.bins[b].count << "\n";
        }
    }
    emit("histograms.csv", hist.str());

    std::ostringstream counts;
    counts << "column,value,count\n";
    for (const auto& c : report.dataset.columns) {
        for (const auto& [value, count] : c.counts) {
            counts << c.name << "," << value << "," << count << "\n";
        }
    }
    emit("value_counts.csv", counts.str());
    return written;
}

RunReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open report " + path.string());
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw DataError("report is not valid JSON: " + path.string());
    return report_from_json(doc);
}

std::string digest_bytes(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string digest_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return digest_bytes(bytes);
}

} // namespace threatbench::pipeline
