#include "formdecomp/matrix_io.hpp"

#include <fstream>

#include "formdecomp/errors.hpp"

namespace formdecomp {

using nlohmann::json;

json matrix_to_json(const CMatrix& m) {
    json entries = json::array();
    for (const auto& z : m.data()) entries.push_back({z.real(), z.imag()});
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

namespace {

Complex complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw InvalidInput("expected a [re, im] pair");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

CMatrix matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
        throw InvalidInput("matrix object needs rows, cols, entries");
    auto rows = j["rows"].get<std::int64_t>();
    auto cols = j["cols"].get<std::int64_t>();
    if (rows <= 0 || cols <= 0) throw InvalidInput("matrix dimensions must be positive");
    const json& entries = j["entries"];
    if (!entries.is_array() ||
        entries.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
        throw InvalidInput("entries length must equal rows*cols");
    std::vector<Complex> data;
    data.reserve(entries.size());
    for (const auto& e : entries) data.push_back(complex_from_json(e));
    CMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(data));
    if (!m.is_finite()) throw InvalidInput("matrix entries must be finite");
    return m;
}

json cvector_to_json(const CVector& v) {
    json out = json::array();
    for (const auto& z : v) out.push_back({z.real(), z.imag()});
    return out;
}

CVector cvector_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw InvalidInput("vector must be a nonempty array");
    CVector v;
    v.reserve(j.size());
    for (const auto& e : j) v.push_back(complex_from_json(e));
    if (!vfinite(v)) throw InvalidInput("vector entries must be finite");
    return v;
}

json family_to_json(const FormFamily& f) {
    json pairs = json::array();
    for (const auto& p : f.pairs())
        pairs.push_back(json{{"A", matrix_to_json(p.a)}, {"B", matrix_to_json(p.b)}});
    return json{{"pairs", std::move(pairs)}};
}

FormFamily family_from_json(const json& j) {
    if (!j.is_object() || !j.contains("pairs") || !j["pairs"].is_array() || j["pairs"].empty())
        throw InvalidInput("family object needs a nonempty pairs array");
    std::vector<std::pair<CMatrix, CMatrix>> pairs;
    for (const auto& p : j["pairs"]) {
        if (!p.is_object() || !p.contains("A") || !p.contains("B"))
            throw InvalidInput("family pair needs A and B");
        pairs.emplace_back(matrix_from_json(p["A"]), matrix_from_json(p["B"]));
    }
    return FormFamily::make(std::move(pairs));
}

json tensor_to_json(const TensorRep& w) {
    json pairs = json::array();
    for (const auto& [x, y] : w.pairs)
        pairs.push_back(json{{"x", cvector_to_json(x)}, {"y", cvector_to_json(y)}});
    return json{{"pairs", std::move(pairs)}};
}

TensorRep tensor_from_json(const json& j) {
    if (!j.is_object() || !j.contains("pairs") || !j["pairs"].is_array())
        throw InvalidInput("tensor object needs a pairs array");
    TensorRep w;
    for (const auto& p : j["pairs"]) {
        if (!p.is_object() || !p.contains("x") || !p.contains("y"))
            throw InvalidInput("tensor pair needs x and y");
        w.pairs.emplace_back(cvector_from_json(p["x"]), cvector_from_json(p["y"]));
    }
    w.validate();
    return w;
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write file: " + path);
    out << j.dump(2) << '\n';
}

CMatrix load_matrix(const std::string& path) { return matrix_from_json(load_json(path)); }

void save_matrix(const std::string& path, const CMatrix& m) {
    save_json(path, matrix_to_json(m));
}

FormFamily load_family(const std::string& path) { return family_from_json(load_json(path)); }

TensorRep load_tensor(const std::string& path) { return tensor_from_json(load_json(path)); }

}  // namespace formdecomp
