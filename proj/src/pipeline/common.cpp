#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "threatbench/core/summary.hpp"
#include "threatbench/evalx/metrics.hpp"

namespace threatbench::pipeline::detail {

RunContext::RunContext(const PipelineConfig& cfg)
    : config(cfg), root(cfg.seed, "pipeline/" + to_string(cfg.domain)) {
    report.toolkit_version = THREATBENCH_VERSION;
    report.domain = to_string(cfg.domain);
    report.config = to_json(cfg);
}

std::string RunContext::prefix(const std::string& stage, const std::exception& e) {
    return "stage '" + stage + "': " + e.what();
}

void RunContext::set_test_rows(std::span<const std::size_t> ids) {
    test_rows_ = std::set<std::size_t>(ids.begin(), ids.end());
}

void RunContext::audit(const std::string& stage, std::span<const std::size_t> ids) {
    StageAudit a{stage, ids.size(), 0};
    for (std::size_t id : ids) a.test_rows_consumed += test_rows_.count(id);
    report.leakage_audit.push_back(a);
}

void RunContext::write_artifact(const std::string& name, const std::string& relative_path,
                                const std::string& text) {
    const auto path = config.out_dir / relative_path;
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw DataError("cannot create directory " + path.parent_path().string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    out.close();
    if (!out) throw DataError("failed writing " + path.string());
    report.artifacts.push_back({name, relative_path, digest_bytes(text)});
}

std::vector<std::size_t> compose(std::span<const std::size_t> ids,
                                 std::span<const std::size_t> positions) {
    std::vector<std::size_t> out(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) out[i] = ids[positions[i]];
    return out;
}

std::vector<int> gather(std::span<const int> values, std::span<const std::size_t> positions) {
    std::vector<int> out(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) out[i] = values[positions[i]];
    return out;
}

Dataset log1p_columns(const Dataset& dataset, std::span<const std::string> columns) {
    for (const auto& c : columns) {
        if (dataset.column(dataset.require(c)).kind != ColumnKind::numeric) {
            throw ConfigError("log transform needs a numeric column: " + c);
        }
    }
    Dataset out;
    for (std::size_t i = 0; i < dataset.cols(); ++i) {
        const auto& spec = dataset.column(i);
        if (spec.kind == ColumnKind::categorical) {
            const auto v = dataset.categorical(i);
            out.add_categorical(spec.name, {v.begin(), v.end()});
            continue;
        }
        const auto v = dataset.numeric(i);
        std::vector<double> values(v.begin(), v.end());
        if (std::find(columns.begin(), columns.end(), spec.name) != columns.end()) {
            for (double& x : values) x = std::log1p(std::max(x, 0.0));
        }
        out.add_numeric(spec, std::move(values));
    }
    return out;
}

std::vector<std::string> numeric_columns(const Dataset& dataset, std::span<const std::string> skip) {
    std::vector<std::string> out;
    for (const auto& spec : dataset.schema()) {
        if (spec.kind != ColumnKind::numeric) continue;
        if (std::find(skip.begin(), skip.end(), spec.name) != skip.end()) continue;
        out.push_back(spec.name);
    }
    return out;
}

DatasetSummary summarize(const Dataset& generated, const std::string& unit, std::size_t rows,
                         std::size_t positives, std::size_t train_rows,
                         std::size_t train_positives, std::size_t test_rows,
                         std::size_t test_positives, std::size_t bins) {
    DatasetSummary s;
    s.unit = unit;
    s.rows = rows;
    s.positives = positives;
    s.train_rows = train_rows;
    s.train_positives = train_positives;
    s.test_rows = test_rows;
    s.test_positives = test_positives;
    s.columns = summarize_columns(generated);
    for (const auto& spec : generated.schema()) {
        if (spec.kind != ColumnKind::numeric) continue;
        s.histograms.push_back({spec.name, histogram(generated.numeric(spec.name), bins)});
    }
    return s;
}

std::size_t count_positive(std::span<const int> labels) {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

ModelBlock score_block(const std::string& name, std::span<const int> y,
                       std::span<const double> scores, double threshold, bool strict,
                       const std::string& positive_class, const std::string& negative_class) {
    std::vector<int> pred(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        pred[i] = strict ? scores[i] > threshold : scores[i] >= threshold;
    }
    ModelBlock block;
    block.name = name;
    block.metrics = evalx::classification_report(y, pred, scores, positive_class, negative_class);
    return block;
}

void attach_importances(ModelBlock& block, const evalx::AttributionReport& report) {
    block.importance_metric = evalx::to_string(report.metric);
    block.importances = report.top(10);
}

std::string dump_model(const nlohmann::json& doc) { return doc.dump() + "\n"; }

} // namespace threatbench::pipeline::detail
