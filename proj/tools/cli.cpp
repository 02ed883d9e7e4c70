#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "geowise/agreement.hpp"
#include "geowise/applicability.hpp"
#include "geowise/autocorr.hpp"
#include "geowise/error.hpp"
#include "geowise/io.hpp"
#include "geowise/multiscale.hpp"
#include "geowise/numeric_format.hpp"
#include "geowise/weights.hpp"
#include "svg.hpp"

namespace geowise::cli {

namespace {

using nlohmann::ordered_json;

// Name of the extra column that carries original row positions through
// Dataset::subset, so polygon weights can be rebuilt on any row subset.
constexpr const char* kRowColumn = "__row";

struct Common {
    std::string input;
    std::string truth;
    std::string estimate;
    std::string group;
    std::string x = "x";
    std::string y = "y";
    std::string format = "csv";
    std::string output;
};

struct Loaded {
    Dataset data;
    std::optional<std::vector<Polygon>> polygons;
};

bool is_geojson(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".geojson" || ext == ".json";
}

std::optional<std::string> opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return s;
}

Loaded load(const Common& c) {
    Loaded in;
    if (is_geojson(c.input)) {
        GeoJsonLayer layer = read_geojson(c.input, c.truth, c.estimate, opt(c.group));
        in.data = std::move(layer.data);
        if (layer.kind == GeometryKind::Polygon) in.polygons = std::move(layer.polygons);
        return in;
    }
    const CsvTable table = read_csv(c.input);
    ColumnBinding binding{c.truth, c.estimate, std::nullopt, std::nullopt, opt(c.group)};
    if (table.find_column(c.x) && table.find_column(c.y)) {
        binding.x = c.x;
        binding.y = c.y;
    }
    in.data = dataset_from_csv(table, binding);
    return in;
}

// Writes to the --output file when given, otherwise to the command's stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw InputError("cannot open output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }

private:
    std::ofstream file_;
    std::ostream& fallback_;
};

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open output file '" + path + "'");
    f << text;
}

ordered_json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

bool any_group(const std::vector<MetricResult>& rows) {
    return std::any_of(rows.begin(), rows.end(), [](const MetricResult& r) { return r.group.has_value(); });
}

void write_results(std::ostream& os, const std::vector<MetricResult>& rows, const std::string& format) {
    const bool grouped = any_group(rows);
    if (format == "json") {
        ordered_json arr = ordered_json::array();
        for (const MetricResult& r : rows) {
            ordered_json o = {{"metric", r.metric}, {"estimator", r.estimator}, {"estimate", json_number(r.estimate)}};
            if (grouped) o["group"] = r.group ? ordered_json(*r.group) : ordered_json(nullptr);
            arr.push_back(std::move(o));
        }
        os << arr.dump(2) << "\n";
        return;
    }
    os << "metric,estimator,estimate" << (grouped ? ",group" : "") << "\n";
    for (const MetricResult& r : rows) {
        os << csv_escape(r.metric) << ',' << csv_escape(r.estimator) << ',' << format_double(r.estimate);
        if (grouped) os << ',' << csv_escape(r.group.value_or(""));
        os << "\n";
    }
}

// Local statistics carry one row per observation, so their notes name it.
void report_notes(std::ostream& err, const std::vector<MetricResult>& rows, bool per_row = false) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].note.empty()) continue;
        err << "note: " << rows[i].metric;
        if (per_row) err << " row " << i;
        err << ": " << rows[i].note << "\n";
    }
}

// The agreement family, in registration order.
std::vector<std::string> default_metric_names() {
    std::vector<std::string> names;
    for (const Metric& m : metric_registry())
        if (m.name != "rmse" && m.name != "mae") names.push_back(m.name);
    return names;
}

int cmd_metrics(const Common& c, const std::vector<std::string>& metrics, std::ostream& out, std::ostream& err) {
    if (c.format == "svg") throw InputError("--format svg is only available for grid and local outputs");
    const MetricSet set = metric_set(metrics.empty() ? default_metric_names() : metrics);
    const Loaded in = load(c);
    const auto rows = set(in.data);
    report_notes(err, rows);
    Sink sink(c.output, out);
    write_results(sink.stream(), rows, c.format);
    return kOk;
}

struct AutocorrOptions {
    std::string stat;
    std::string weights;
    std::string weights_out;
    std::string style = "row";
    Eigen::Index k = 1;
};

int cmd_autocorr(const Common& c, const AutocorrOptions& a, std::ostream& out, std::ostream& err) {
    const AutocorrStatistic stat = parse_statistic(a.stat);
    if (c.format == "svg" && !is_local(stat)) throw InputError("--format svg needs a local statistic");
    Loaded in = load(c);
    Dataset& data = in.data;
    const Eigen::Index n = data.n_rows();

    WeightsOptions wopts;
    wopts.style = a.style == "binary" ? WeightsStyle::Binary : WeightsStyle::RowStandardized;

    WeightsSource source;
    std::optional<WeightsMatrix> full;
    if (!a.weights.empty()) {
        if (data.is_grouped()) throw InputError("--weights cannot be combined with --group");
        full = read_weights_csv(a.weights, n);
        source = *full;
    } else if (in.polygons) {
        Eigen::VectorXd rows(n);
        for (Eigen::Index i = 0; i < n; ++i) rows[i] = static_cast<double>(i);
        data.extra.emplace_back(kRowColumn, rows);
        const std::vector<Polygon>& polygons = *in.polygons;
        source = WeightsBuilder([&polygons, wopts](const Dataset& sub) {
            const Eigen::VectorXd* idx = nullptr;
            for (const auto& [name, col] : sub.extra)
                if (name == kRowColumn) idx = &col;
            std::vector<Polygon> subset;
            for (Eigen::Index k = 0; k < idx->size(); ++k)
                subset.push_back(polygons[static_cast<std::size_t>((*idx)[k])]);
            return build_weights(build_neighbors_polygons(subset), wopts);
        });
    } else if (data.has_geometry()) {
        const Eigen::Index k = a.k;
        source = WeightsBuilder([k, wopts](const Dataset& sub) {
            return build_weights(build_neighbors_points(*sub.geometry, k), wopts);
        });
    } else {
        throw InputError("autocorr needs point or polygon geometry, or --weights");
    }

    if (!a.weights_out.empty()) {
        if (data.is_grouped()) throw InputError("--weights-out cannot be combined with --group");
        if (!full) full = std::get<WeightsBuilder>(source)(data);
        std::ostringstream os;
        write_weights_csv(os, *full);
        write_file(a.weights_out, os.str());
    }

    const auto rows = evaluate_autocorr(stat, data, source);
    report_notes(err, rows, is_local(stat));
    Sink sink(c.output, out);
    if (c.format != "svg") {
        write_results(sink.stream(), rows, c.format);
        return kOk;
    }
    std::vector<svg::Shape> shapes;
    if (in.polygons) {
        shapes.assign(in.polygons->begin(), in.polygons->end());
    } else if (data.has_geometry()) {
        shapes.assign(data.geometry->begin(), data.geometry->end());
    } else {
        throw InputError("--format svg needs geometry in the input");
    }
    std::vector<double> values;
    for (const MetricResult& r : rows) values.push_back(r.estimate);
    sink.stream() << svg::choropleth(shapes, values, statistic_name(stat));
    return kOk;
}

struct MultiscaleOptions {
    std::vector<Eigen::Index> n;
    std::vector<double> cellsize;
    std::string grids;
    std::string grid_out;
    std::size_t svg_grid = 0;
};

std::string grid_args_text(const std::vector<std::pair<std::string, double>>& args) {
    std::string s;
    for (const auto& [name, value] : args) {
        if (!s.empty()) s += ';';
        s += name + "=" + format_double(value);
    }
    return s;
}

int cmd_multiscale(const Common& c, const std::vector<std::string>& metrics, const MultiscaleOptions& m,
                   std::ostream& out, std::ostream&) {
    std::vector<GridSpec> specs;
    for (Eigen::Index n : m.n) specs.push_back(GridSpec::cells(n));
    for (double s : m.cellsize) specs.push_back(GridSpec::size(s));
    if (specs.empty() == m.grids.empty())
        throw InputError(specs.empty() ? "multiscale needs --n, --cellsize or --grids"
                                       : "--grids cannot be combined with --n or --cellsize");
    const MetricSet set = metrics.empty() ? default_multiscale_metrics() : metric_set(metrics);

    std::vector<std::vector<Polygon>> polygons;
    if (!m.grids.empty()) {
        GeoJsonLayer layer = read_geojson(m.grids, "", "");
        if (layer.kind != GeometryKind::Polygon || layer.polygons.empty())
            throw InputError("--grids must be a GeoJSON FeatureCollection of polygons");
        polygons.push_back(std::move(layer.polygons));
    }

    std::vector<MultiScaleRow> rows;
    if (!c.input.empty()) {
        const Loaded in = load(c);
        if (in.polygons) throw InputError("multiscale needs point input");
        if (!in.data.has_geometry()) throw InputError("input has no '" + c.x + "'/'" + c.y + "' columns");
        rows = specs.empty() ? multi_scale(in.data, set, polygons) : multi_scale(in.data, set, specs);
    } else {
        const RasterGrid truth = read_ascii_grid(c.truth);
        const RasterGrid estimate = read_ascii_grid(c.estimate);
        rows = specs.empty() ? multi_scale_raster(truth, estimate, set, polygons)
                             : multi_scale_raster(truth, estimate, set, specs);
    }

    const bool grouped = std::any_of(rows.begin(), rows.end(), [](const MultiScaleRow& r) { return r.result.group; });
    if (!m.grid_out.empty()) {
        std::filesystem::create_directories(m.grid_out);
        std::vector<std::optional<std::string>> groups;
        for (const MultiScaleRow& r : rows) {
            auto pos = std::find(groups.begin(), groups.end(), r.result.group);
            const auto g = static_cast<std::size_t>(pos - groups.begin());
            if (pos == groups.end()) groups.push_back(r.result.group);
            std::string name = "grid_" + std::to_string(r.grid_index);
            if (grouped) name += "_group_" + std::to_string(g);
            write_file((std::filesystem::path(m.grid_out) / (name + ".geojson")).string(), grid_to_geojson(r.grid));
        }
    }

    Sink sink(c.output, out);
    std::ostream& os = sink.stream();
    if (c.format == "svg") {
        if (grouped) throw InputError("--format svg cannot be combined with --group");
        auto it = std::find_if(rows.begin(), rows.end(),
                               [&](const MultiScaleRow& r) { return r.grid_index == m.svg_grid; });
        if (it == rows.end()) throw InputError("--svg-grid " + std::to_string(m.svg_grid) + " is out of range");
        std::vector<svg::Shape> shapes;
        std::vector<double> values;
        for (const GridCell& cell : it->grid) {
            if (cell.truth_count == 0 || cell.estimate_count == 0) continue;
            shapes.emplace_back(cell.polygon);
            values.push_back(cell.truth_mean - cell.estimate_mean);
        }
        os << svg::choropleth(shapes, values, "truth_mean - estimate_mean");
        return kOk;
    }
    if (c.format == "json") {
        ordered_json arr = ordered_json::array();
        for (const MultiScaleRow& r : rows) {
            ordered_json args = ordered_json::object();
            for (const auto& [name, value] : r.grid_args) args[name] = value;
            ordered_json notes = ordered_json::array();
            for (const Note& note : r.notes) notes.push_back({{"kind", note.kind}, {"message", note.message}});
            ordered_json o = {{"metric", r.result.metric},
                              {"estimator", r.result.estimator},
                              {"estimate", json_number(r.result.estimate)},
                              {"grid", r.grid_index},
                              {"grid_args", std::move(args)},
                              {"notes", std::move(notes)}};
            if (grouped) o["group"] = r.result.group ? ordered_json(*r.result.group) : ordered_json(nullptr);
            arr.push_back(std::move(o));
        }
        os << arr.dump(2) << "\n";
        return kOk;
    }
    os << "metric,estimator,estimate,grid,grid_args" << (grouped ? ",group" : "") << "\n";
    for (const MultiScaleRow& r : rows) {
        os << csv_escape(r.result.metric) << ',' << csv_escape(r.result.estimator) << ','
           << format_double(r.result.estimate) << ',' << r.grid_index << ',' << csv_escape(grid_args_text(r.grid_args));
        if (grouped) os << ',' << csv_escape(r.result.group.value_or(""));
        os << "\n";
    }
    return kOk;
}

struct AoaFitOptions {
    std::string input;
    std::string importance;
    std::string testing;
    std::string folds;
    std::string output;
};

int cmd_aoa_fit(const AoaFitOptions& a, std::ostream& out) {
    if (!a.testing.empty() && !a.folds.empty()) throw InputError("--testing cannot be combined with --folds");
    const PredictorTable training = read_predictor_csv(a.input);
    const auto importance = read_importance_csv(a.importance);
    AoaModel model;
    if (!a.folds.empty()) {
        model = fit_aoa_cv(training, read_folds_csv(a.folds, training.rows()), importance);
    } else {
        std::optional<PredictorTable> testing;
        if (!a.testing.empty()) testing = read_predictor_csv(a.testing);
        model = fit_aoa(training, importance, testing);
    }
    if (!a.output.empty()) write_file(a.output, aoa_model_to_json(model));
    out << summary(model);
    if (model.testing_di.size() > 0) {
        std::vector<double> di;
        for (double v : model.testing_di)
            if (!std::isnan(v)) di.push_back(v);
        out << "Testing DI (min, Q25, median, Q75, max):\n  ";
        for (double p : {0.0, 0.25, 0.5, 0.75, 1.0})
            out << ' ' << (di.empty() ? std::string("NA") : format_double(quantile(di, p)));
        out << "\n";
    }
    return kOk;
}

int cmd_aoa_predict(const std::string& model_path, const std::string& input, const std::string& output,
                    std::ostream& out) {
    const AoaModel model = aoa_model_from_json(read_text_file(model_path));
    const auto predictions = predict_aoa(model, read_predictor_csv(input));
    Sink sink(output, out);
    std::ostream& os = sink.stream();
    os << "di,aoa\n";
    for (const AoaPrediction& p : predictions)
        os << format_double(p.di) << ',' << (p.aoa ? (*p.aoa ? "true" : "false") : "") << "\n";
    return kOk;
}

void add_common(CLI::App* app, Common& c, bool with_format) {
    app->add_option("--input", c.input, "Input CSV or GeoJSON");
    app->add_option("--truth", c.truth, "Observed-value column")->required();
    app->add_option("--estimate", c.estimate, "Predicted-value column")->required();
    app->add_option("--group", c.group, "Grouping column");
    app->add_option("--x", c.x, "x coordinate column of CSV input")->capture_default_str();
    app->add_option("--y", c.y, "y coordinate column of CSV input")->capture_default_str();
    if (with_format)
        app->add_option("--format", c.format, "Output format")
            ->check(CLI::IsMember({"csv", "json", "svg"}))
            ->capture_default_str();
    app->add_option("--output", c.output, "Output path (default: standard output)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Agreement, autocorrelation, multi-scale and applicability assessment of spatial predictions",
                 "geowise"};
    app.require_subcommand(1);

    Common common;
    std::vector<std::string> metrics;

    auto* metrics_cmd = app.add_subcommand("metrics", "Agreement metrics of truth against estimate");
    add_common(metrics_cmd, common, true);
    metrics_cmd->add_option("--metric", metrics, "Metric name (repeatable)");

    AutocorrOptions ac;
    auto* autocorr_cmd = app.add_subcommand("autocorr", "Spatial autocorrelation of residuals");
    add_common(autocorr_cmd, common, true);
    autocorr_cmd->add_option("--stat", ac.stat, "Statistic name")->required();
    autocorr_cmd->add_option("--weights", ac.weights, "Weights CSV with columns i,j,w");
    autocorr_cmd->add_option("--weights-out", ac.weights_out, "Write the weights used as i,j,w CSV");
    autocorr_cmd->add_option("--style", ac.style, "Weights style")
        ->check(CLI::IsMember({"row", "binary"}))
        ->capture_default_str();
    autocorr_cmd->add_option("--k", ac.k, "Neighbours per point")->check(CLI::PositiveNumber)->capture_default_str();

    MultiscaleOptions ms;
    auto* multiscale_cmd = app.add_subcommand(
        "multiscale", "Metrics on grid-aggregated data; without --input, --truth/--estimate are ASCII grids");
    add_common(multiscale_cmd, common, true);
    multiscale_cmd->add_option("--metric", metrics, "Metric name (repeatable)");
    multiscale_cmd->add_option("--n", ms.n, "Cells per side (repeatable)")->check(CLI::PositiveNumber);
    multiscale_cmd->add_option("--cellsize", ms.cellsize, "Cell size (repeatable)")->check(CLI::PositiveNumber);
    multiscale_cmd->add_option("--grids", ms.grids, "GeoJSON polygons forming one grid");
    multiscale_cmd->add_option("--grid-out", ms.grid_out, "Directory for per-grid GeoJSON");
    multiscale_cmd->add_option("--svg-grid", ms.svg_grid, "Grid drawn by --format svg")->capture_default_str();

    auto* aoa_cmd = app.add_subcommand("aoa", "Dissimilarity index and area of applicability");
    aoa_cmd->require_subcommand(1);
    AoaFitOptions fit;
    auto* fit_cmd = aoa_cmd->add_subcommand("fit", "Fit an applicability model");
    fit_cmd->add_option("--input", fit.input, "Training predictors CSV")->required();
    fit_cmd->add_option("--importance", fit.importance, "CSV with columns term,estimate")->required();
    fit_cmd->add_option("--testing", fit.testing, "Testing predictors CSV");
    fit_cmd->add_option("--folds", fit.folds, "CSV with columns row_index,fold_id");
    fit_cmd->add_option("--output", fit.output, "Model JSON path");
    std::string model_path, predict_input, predict_output;
    auto* predict_cmd = aoa_cmd->add_subcommand("predict", "Apply an applicability model");
    predict_cmd->add_option("--model", model_path, "Model JSON from 'aoa fit'")->required();
    predict_cmd->add_option("--input", predict_input, "Predictors CSV")->required();
    predict_cmd->add_option("--output", predict_output, "Output CSV path (default: standard output)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (*metrics_cmd || *autocorr_cmd) {
            if (common.input.empty()) throw InputError("--input is required");
            return *metrics_cmd ? cmd_metrics(common, metrics, out, err) : cmd_autocorr(common, ac, out, err);
        }
        if (*multiscale_cmd) return cmd_multiscale(common, metrics, ms, out, err);
        if (*fit_cmd) return cmd_aoa_fit(fit, out);
        return cmd_aoa_predict(model_path, predict_input, predict_output, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kComputation;
    }
}

}  // namespace geowise::cli
