#include "sbridge/io.hpp"

#include "sbridge/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace sbridge {

using json = nlohmann::ordered_json;

namespace {

std::string join(const std::string& path, std::string_view key)
{
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string join(const std::string& path, std::size_t i)
{
    return path + "[" + std::to_string(i) + "]";
}

json parse_json(std::string_view text)
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // e.what() already carries "at line L, column C".
        throw DocumentError("", e.what());
    }
}

const json& require_field(const json& obj, std::string_view key, const std::string& path)
{
    if (!obj.is_object()) throw DocumentError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw DocumentError(join(path, key), "missing required field");
    return *it;
}

const json* optional_field(const json& obj, std::string_view key)
{
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

const json& require_array(const json& j, const std::string& path)
{
    if (!j.is_array()) throw DocumentError(path, "expected an array");
    return j;
}

double read_number(const json& j, const std::string& path)
{
    if (!j.is_number()) throw DocumentError(path, "expected a number");
    return j.get<double>();
}

std::size_t read_count(const json& j, const std::string& path)
{
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::size_t>(j.get<std::int64_t>());
    throw DocumentError(path, "expected a nonnegative integer");
}

std::int8_t read_sign(const json& j, const std::string& path)
{
    if (!j.is_number_integer()) throw DocumentError(path, "expected an integer sign");
    const auto v = j.get<std::int64_t>();
    if (v < std::numeric_limits<std::int8_t>::min() || v > std::numeric_limits<std::int8_t>::max()) {
        throw DocumentError(path, "sign value out of range");
    }
    return static_cast<std::int8_t>(v);
}

std::vector<double> read_number_array(const json& j, const std::string& path)
{
    require_array(j, path);
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_number(j[i], join(path, i)));
    return out;
}

std::vector<std::size_t> read_count_array(const json& j, const std::string& path)
{
    require_array(j, path);
    std::vector<std::size_t> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_count(j[i], join(path, i)));
    return out;
}

// Nested row-major arrays; `visit(value_json, path)` is called once per leaf in storage order.
template <class Visit>
void walk_nested(const json& j, const Shape& shape, std::size_t depth, const std::string& path, Visit&& visit)
{
    require_array(j, path);
    if (j.size() != shape[depth]) {
        throw DocumentError(path, "expected " + std::to_string(shape[depth]) + " elements, got " +
                                      std::to_string(j.size()));
    }
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (depth + 1 == shape.size()) {
            visit(j[i], join(path, i));
        } else {
            walk_nested(j[i], shape, depth + 1, join(path, i), visit);
        }
    }
}

DenseTensor read_dense(const json& j, const Shape& shape, const std::string& path)
{
    std::vector<double> values;
    walk_nested(j, shape, 0, path, [&](const json& v, const std::string& p) { values.push_back(read_number(v, p)); });
    return DenseTensor(shape, std::move(values));
}

SignTemplate read_template(const json& j, const Shape& shape, const std::string& path)
{
    std::vector<std::int8_t> signs;
    walk_nested(j, shape, 0, path, [&](const json& v, const std::string& p) { signs.push_back(read_sign(v, p)); });
    return SignTemplate(shape, std::move(signs));
}

template <class Leaf>
json write_nested(const Shape& shape, std::size_t depth, std::size_t& flat, Leaf&& leaf)
{
    json arr = json::array();
    for (std::size_t i = 0; i < shape[depth]; ++i) {
        if (depth + 1 == shape.size()) {
            arr.push_back(leaf(flat++));
        } else {
            arr.push_back(write_nested(shape, depth + 1, flat, leaf));
        }
    }
    return arr;
}

json dense_json(const DenseTensor& t)
{
    std::size_t flat = 0;
    return write_nested(t.shape(), 0, flat, [&](std::size_t i) { return t[i]; });
}

json template_json(const SignTemplate& t)
{
    std::size_t flat = 0;
    return write_nested(t.shape(), 0, flat, [&](std::size_t i) { return static_cast<int>(t[i]); });
}

json number_json(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double read_number_or_nan(const json& j, const std::string& path)
{
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : read_number(j, path);
}

Shape read_shape(const json& root)
{
    const Shape shape = read_count_array(require_field(root, "shape", ""), "shape");
    if (shape.empty()) throw DocumentError("shape", "must list at least one extent");
    for (std::size_t m = 0; m < shape.size(); ++m) {
        if (shape[m] == 0) throw DocumentError(join("shape", m), "extent must be positive");
    }
    const std::size_t order = read_count(require_field(root, "order", ""), "order");
    if (order != shape.size()) {
        throw DocumentError("order", "is " + std::to_string(order) + " but shape has " +
                                         std::to_string(shape.size()) + " extents");
    }
    return shape;
}

Encoding read_encoding(const json& root)
{
    const json* enc = optional_field(root, "encoding");
    if (!enc) return Encoding::Dense;
    if (*enc == "dense") return Encoding::Dense;
    if (*enc == "sparse") return Encoding::Sparse;
    throw DocumentError("encoding", "expected \"dense\" or \"sparse\"");
}

std::string_view encoding_name(Encoding e)
{
    return e == Encoding::Dense ? "dense" : "sparse";
}

SolveStatus read_status(const json& j)
{
    if (j == "converged") return SolveStatus::Converged;
    if (j == "max_iterations") return SolveStatus::MaxIterations;
    if (j == "diverged") return SolveStatus::Diverged;
    throw DocumentError("status", "expected converged, max_iterations or diverged");
}

}  // namespace

void OptionOverrides::apply(SolveOptions& options) const
{
    if (tolerance) options.tolerance = *tolerance;
    if (max_iterations) options.max_iterations = *max_iterations;
    if (overflow_guard) options.overflow_guard = *overflow_guard;
    if (record_trace) options.record_trace = *record_trace;
}

ProblemDocument parse_problem_document(std::string_view text)
{
    const json root = parse_json(text);
    if (!root.is_object()) throw DocumentError("", "top level must be an object");

    ProblemDocument doc;
    if (const json* v = optional_field(root, "format_version")) {
        if (!v->is_string()) throw DocumentError("format_version", "expected a string");
        doc.version = v->get<std::string>();
    }
    const Shape shape = read_shape(root);
    const std::size_t k = shape.size();
    BridgeProblem& problem = doc.problem;

    const json* dense = optional_field(root, "prior");
    const json* sparse = optional_field(root, "entries");
    if ((dense != nullptr) == (sparse != nullptr)) {
        throw DocumentError("prior", "exactly one of \"prior\" (dense) and \"entries\" (sparse) must be present");
    }
    if (dense) {
        doc.encoding = Encoding::Dense;
        problem.prior = read_dense(*dense, shape, "prior");
        const json& templates = require_array(require_field(root, "templates", ""), "templates");
        if (templates.size() != k) {
            throw DocumentError("templates", "expected " + std::to_string(k) + " templates, got " +
                                                 std::to_string(templates.size()));
        }
        for (std::size_t m = 0; m < k; ++m) {
            problem.templates.push_back(read_template(templates[m], shape, join("templates", m)));
        }
    } else {
        doc.encoding = Encoding::Sparse;
        if (optional_field(root, "templates")) {
            throw DocumentError("templates", "sparse documents carry signs inside \"entries\"");
        }
        require_array(*sparse, "entries");
        std::vector<SparseEntry> entries;
        for (std::size_t e = 0; e < sparse->size(); ++e) {
            const std::string path = join("entries", e);
            const json& item = (*sparse)[e];
            SparseEntry entry;
            entry.idx = read_count_array(require_field(item, "idx", path), join(path, "idx"));
            entry.prior_value = read_number(require_field(item, "prior_value", path), join(path, "prior_value"));
            const json& signs = require_array(require_field(item, "signs", path), join(path, "signs"));
            for (std::size_t m = 0; m < signs.size(); ++m) {
                entry.signs.push_back(read_sign(signs[m], join(join(path, "signs"), m)));
            }
            entries.push_back(std::move(entry));
        }
        try {
            DenseEncoding enc = dense_from_sparse(shape, entries);
            problem.prior = std::move(enc.prior);
            problem.templates = std::move(enc.templates);
        } catch (const Error& e) {
            throw DocumentError("entries", e.what());
        }
    }

    const json& marginals = require_array(require_field(root, "marginals", ""), "marginals");
    if (marginals.size() != k) {
        throw DocumentError("marginals", "expected " + std::to_string(k) + " vectors, got " +
                                             std::to_string(marginals.size()));
    }
    for (std::size_t m = 0; m < k; ++m) {
        auto v = read_number_array(marginals[m], join("marginals", m));
        if (v.size() != shape[m]) {
            throw DocumentError(join("marginals", m), "expected length " + std::to_string(shape[m]) + ", got " +
                                                          std::to_string(v.size()));
        }
        problem.marginals.push_back(std::move(v));
    }

    problem.options.unconstrained.assign(k, {});
    if (const json* unc = optional_field(root, "unconstrained")) {
        require_array(*unc, "unconstrained");
        if (unc->size() != k) throw DocumentError("unconstrained", "expected one list per mode");
        for (std::size_t m = 0; m < k; ++m) {
            const std::string path = join("unconstrained", m);
            auto list = read_count_array((*unc)[m], path);
            for (std::size_t i = 0; i < list.size(); ++i) {
                if (list[i] >= shape[m]) throw DocumentError(join(path, i), "index out of range");
            }
            problem.options.unconstrained[m] = std::move(list);
        }
    }

    if (const json* opt = optional_field(root, "options")) {
        if (!opt->is_object()) throw DocumentError("options", "expected an object");
        if (const json* v = optional_field(*opt, "tolerance")) {
            doc.overrides.tolerance = read_number(*v, "options.tolerance");
        }
        if (const json* v = optional_field(*opt, "max_iterations")) {
            doc.overrides.max_iterations = read_count(*v, "options.max_iterations");
        }
        if (const json* v = optional_field(*opt, "overflow_guard")) {
            doc.overrides.overflow_guard = read_number(*v, "options.overflow_guard");
        }
        if (const json* v = optional_field(*opt, "record_trace")) {
            if (!v->is_boolean()) throw DocumentError("options.record_trace", "expected a boolean");
            doc.overrides.record_trace = v->get<bool>();
        }
        for (auto it = opt->begin(); it != opt->end(); ++it) {
            if (it.key() != "tolerance" && it.key() != "max_iterations" && it.key() != "overflow_guard" &&
                it.key() != "record_trace") {
                throw DocumentError("options." + it.key(), "unknown option");
            }
        }
        doc.overrides.apply(problem.options);
    }

    if (const json* ref = optional_field(root, "reference_posterior")) {
        doc.reference_posterior = read_dense(*ref, shape, "reference_posterior");
    }
    return doc;
}

std::string serialize_problem_document(const ProblemDocument& doc)
{
    const BridgeProblem& problem = doc.problem;
    const Shape& shape = problem.prior.shape();
    json root;
    root["format_version"] = doc.version;
    root["order"] = shape.size();
    root["shape"] = shape;
    if (doc.encoding == Encoding::Dense) {
        root["prior"] = dense_json(problem.prior);
        json templates = json::array();
        for (const auto& t : problem.templates) templates.push_back(template_json(t));
        root["templates"] = std::move(templates);
    } else {
        json entries = json::array();
        for (const auto& e : sparse_from_dense(problem.prior, problem.templates)) {
            json item;
            item["idx"] = e.idx;
            item["prior_value"] = e.prior_value;
            json signs = json::array();
            for (std::int8_t s : e.signs) signs.push_back(static_cast<int>(s));
            item["signs"] = std::move(signs);
            entries.push_back(std::move(item));
        }
        root["entries"] = std::move(entries);
    }
    root["marginals"] = problem.marginals;
    json unconstrained = json::array();
    for (std::size_t m = 0; m < shape.size(); ++m) {
        unconstrained.push_back(m < problem.options.unconstrained.size() ? json(problem.options.unconstrained[m])
                                                                         : json::array());
    }
    root["unconstrained"] = std::move(unconstrained);
    if (!doc.overrides.empty()) {
        json opt = json::object();
        if (doc.overrides.tolerance) opt["tolerance"] = *doc.overrides.tolerance;
        if (doc.overrides.max_iterations) opt["max_iterations"] = *doc.overrides.max_iterations;
        if (doc.overrides.overflow_guard) opt["overflow_guard"] = *doc.overrides.overflow_guard;
        if (doc.overrides.record_trace) opt["record_trace"] = *doc.overrides.record_trace;
        root["options"] = std::move(opt);
    }
    if (doc.reference_posterior) root["reference_posterior"] = dense_json(*doc.reference_posterior);
    return root.dump(2) + "\n";
}

ProblemDocument make_problem_document(const BridgeProblem& problem, Encoding encoding)
{
    ProblemDocument doc;
    doc.encoding = encoding;
    doc.problem = problem;
    doc.problem.options.unconstrained.resize(problem.order());
    const SolveOptions defaults;
    if (problem.options.tolerance != defaults.tolerance) doc.overrides.tolerance = problem.options.tolerance;
    if (problem.options.max_iterations != defaults.max_iterations) {
        doc.overrides.max_iterations = problem.options.max_iterations;
    }
    if (problem.options.overflow_guard != defaults.overflow_guard) {
        doc.overrides.overflow_guard = problem.options.overflow_guard;
    }
    if (problem.options.record_trace != defaults.record_trace) doc.overrides.record_trace = problem.options.record_trace;
    return doc;
}

SolutionDocument make_solution_document(const BridgeSolution& solution, const BridgeProblem& problem, Encoding encoding,
                                        std::optional<std::string> trace_path)
{
    SolutionDocument doc;
    doc.encoding = encoding;
    doc.posterior = solution.posterior;
    doc.factors = solution.factors.factors;
    doc.status = solution.status;
    doc.iterations_used = solution.iterations_used;
    doc.final_residuals = solution.final_residuals;
    doc.trace_path = std::move(trace_path);
    if (encoding == Encoding::Sparse) {
        for (std::size_t flat = 0; flat < problem.prior.size(); ++flat) {
            if (problem.prior[flat] > 0.0) doc.support.push_back(flat);
        }
    }
    return doc;
}

std::string serialize_solution_document(const SolutionDocument& doc)
{
    const Shape& shape = doc.posterior.shape();
    json root;
    root["format_version"] = doc.version;
    root["order"] = shape.size();
    root["shape"] = shape;
    root["encoding"] = encoding_name(doc.encoding);
    root["status"] = to_string(doc.status);
    root["iterations_used"] = doc.iterations_used;
    json residuals = json::array();
    for (double r : doc.final_residuals) residuals.push_back(number_json(r));
    root["final_residuals"] = std::move(residuals);
    json factors = json::array();
    for (const auto& f : doc.factors) {
        json row = json::array();
        for (double x : f) row.push_back(number_json(x));
        factors.push_back(std::move(row));
    }
    root["factors"] = std::move(factors);
    if (doc.encoding == Encoding::Dense) {
        std::size_t flat = 0;
        root["posterior"] = write_nested(shape, 0, flat, [&](std::size_t i) { return number_json(doc.posterior[i]); });
    } else {
        json entries = json::array();
        for (std::size_t flat : doc.support) {
            json item;
            item["idx"] = doc.posterior.layout().unravel(flat);
            item["value"] = number_json(doc.posterior[flat]);
            entries.push_back(std::move(item));
        }
        root["posterior"] = std::move(entries);
    }
    root["trace"] = doc.trace_path ? json(*doc.trace_path) : json(nullptr);
    return root.dump(2) + "\n";
}

namespace {

DenseTensor read_sparse_posterior(const json& j, const Shape& shape, const std::string& path,
                                  std::vector<std::size_t>* support)
{
    require_array(j, path);
    DenseTensor out(shape);
    for (std::size_t e = 0; e < j.size(); ++e) {
        const std::string item_path = join(path, e);
        const auto idx = read_count_array(require_field(j[e], "idx", item_path), join(item_path, "idx"));
        std::size_t flat = 0;
        try {
            flat = out.layout().flat_index(idx);
        } catch (const ShapeError& err) {
            throw DocumentError(join(item_path, "idx"), err.what());
        }
        out[flat] = read_number_or_nan(require_field(j[e], "value", item_path), join(item_path, "value"));
        if (support) support->push_back(flat);
    }
    return out;
}

DenseTensor read_dense_or_null(const json& j, const Shape& shape, const std::string& path)
{
    std::vector<double> values;
    walk_nested(j, shape, 0, path,
                [&](const json& v, const std::string& p) { values.push_back(read_number_or_nan(v, p)); });
    return DenseTensor(shape, std::move(values));
}

}  // namespace

SolutionDocument parse_solution_document(std::string_view text)
{
    const json root = parse_json(text);
    if (!root.is_object()) throw DocumentError("", "top level must be an object");
    SolutionDocument doc;
    if (const json* v = optional_field(root, "format_version")) {
        if (!v->is_string()) throw DocumentError("format_version", "expected a string");
        doc.version = v->get<std::string>();
    }
    const Shape shape = read_shape(root);
    doc.encoding = read_encoding(root);
    doc.status = read_status(require_field(root, "status", ""));
    doc.iterations_used = read_count(require_field(root, "iterations_used", ""), "iterations_used");
    const json& residuals = require_array(require_field(root, "final_residuals", ""), "final_residuals");
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        doc.final_residuals.push_back(read_number_or_nan(residuals[i], join("final_residuals", i)));
    }
    const json& factors = require_array(require_field(root, "factors", ""), "factors");
    for (std::size_t m = 0; m < factors.size(); ++m) {
        const std::string path = join("factors", m);
        require_array(factors[m], path);
        std::vector<double> row;
        for (std::size_t t = 0; t < factors[m].size(); ++t) row.push_back(read_number_or_nan(factors[m][t], join(path, t)));
        doc.factors.push_back(std::move(row));
    }
    const json& posterior = require_field(root, "posterior", "");
    doc.posterior = doc.encoding == Encoding::Dense ? read_dense_or_null(posterior, shape, "posterior")
                                                    : read_sparse_posterior(posterior, shape, "posterior", &doc.support);
    if (const json* trace = optional_field(root, "trace")) {
        if (!trace->is_string()) throw DocumentError("trace", "expected a path string or null");
        doc.trace_path = trace->get<std::string>();
    }
    return doc;
}

DenseTensor parse_posterior(std::string_view text, const Shape& shape)
{
    const json root = parse_json(text);
    if (!root.is_object()) throw DocumentError("", "top level must be an object");
    if (const json* shape_field = optional_field(root, "shape")) {
        if (read_count_array(*shape_field, "shape") != shape) {
            throw DocumentError("shape", "posterior shape does not match the problem");
        }
    }
    if (const json* p = optional_field(root, "posterior")) {
        if (read_encoding(root) == Encoding::Sparse) return read_sparse_posterior(*p, shape, "posterior", nullptr);
        return read_dense_or_null(*p, shape, "posterior");
    }
    if (const json* p = optional_field(root, "reference_posterior")) {
        return read_dense(*p, shape, "reference_posterior");
    }
    throw DocumentError("posterior", "document has neither \"posterior\" nor \"reference_posterior\"");
}

HypergraphDocument parse_hypergraph_document(std::string_view text)
{
    const json root = parse_json(text);
    if (!root.is_object()) throw DocumentError("", "top level must be an object");
    HypergraphDocument doc;
    doc.hypergraph.node_count = read_count(require_field(root, "node_count", ""), "node_count");
    const json& edges = require_array(require_field(root, "hyperedges", ""), "hyperedges");
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const std::string path = join("hyperedges", e);
        Hyperedge edge;
        edge.nodes = read_count_array(require_field(edges[e], "nodes", path), join(path, "nodes"));
        const json& sign = require_field(edges[e], "sign", path);
        if (!sign.is_number_integer()) throw DocumentError(join(path, "sign"), "expected -1 or 1");
        edge.sign = sign.get<int>();
        doc.hypergraph.hyperedges.push_back(std::move(edge));
    }
    if (const json* v = optional_field(root, "virtual_nodes")) doc.virtual_nodes = read_count_array(*v, "virtual_nodes");
    try {
        doc.hypergraph.validate();
    } catch (const InvalidHypergraphError& err) {
        throw DocumentError("hyperedges", err.what());
    }
    return doc;
}

std::string serialize_hypergraph_document(const HypergraphDocument& doc)
{
    json root;
    root["node_count"] = doc.hypergraph.node_count;
    json edges = json::array();
    for (const auto& e : doc.hypergraph.hyperedges) {
        json item;
        item["nodes"] = e.nodes;
        item["sign"] = e.sign;
        edges.push_back(std::move(item));
    }
    root["hyperedges"] = std::move(edges);
    if (doc.virtual_nodes) root["virtual_nodes"] = *doc.virtual_nodes;
    return root.dump(2) + "\n";
}

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace)
{
    out << trace_csv_header << '\n';
    char buf[128];
    for (const TraceRow& row : trace) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g,%.17g\n", row.sweep, row.mode, row.residual_inf,
                      row.residual_l2, row.dual_value);
        out << buf;
    }
}

ConvergenceTrace read_trace_csv(std::istream& in)
{
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw DocumentError("line 1", "empty trace file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != trace_csv_header) throw DocumentError("line 1", "expected header \"" + std::string(trace_csv_header) + "\"");

    ConvergenceTrace trace;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (cells.size() != 5) throw DocumentError(where, "expected 5 comma-separated fields");

        TraceRow row;
        try {
            std::size_t used = 0;
            const long long sweep = std::stoll(cells[0], &used);
            if (used != cells[0].size() || sweep < 0) throw std::invalid_argument("sweep");
            const long long mode = std::stoll(cells[1], &used);
            if (used != cells[1].size() || mode < 0) throw std::invalid_argument("mode");
            row.sweep = static_cast<std::size_t>(sweep);
            row.mode = static_cast<std::size_t>(mode);
            double* dst[] = {&row.residual_inf, &row.residual_l2, &row.dual_value};
            for (int c = 0; c < 3; ++c) {
                *dst[c] = std::stod(cells[2 + c], &used);
                if (used != cells[2 + c].size()) throw std::invalid_argument("number");
            }
        } catch (const std::exception&) {
            throw DocumentError(where, "malformed numeric field");
        }
        if (!trace.empty() && row.sweep < trace.back().sweep) throw DocumentError(where, "sweep index decreases");
        if (row.residual_inf < 0.0 || row.residual_l2 < 0.0) throw DocumentError(where, "negative residual");
        trace.push_back(row);
    }
    return trace;
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DocumentError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DocumentError(path, "cannot open file for writing");
    out << text;
    if (!out) throw DocumentError(path, "write failed");
}

}  // namespace sbridge
