#pragma once

#include <string>

#include <json.hpp>

#include "formdecomp/cmatrix.hpp"
#include "formdecomp/gauges.hpp"
#include "formdecomp/tensor.hpp"

namespace formdecomp {

// File schemas: a matrix is {"rows": R, "cols": C, "entries": [[re, im], ...]}
// row-major; a family is {"pairs": [{"A": matrix, "B": matrix}, ...]}; a
// tensor is {"pairs": [{"x": [[re, im], ...], "y": [...]}, ...]}.

nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json cvector_to_json(const CVector& v);
CVector cvector_from_json(const nlohmann::json& j);

nlohmann::json family_to_json(const FormFamily& f);
FormFamily family_from_json(const nlohmann::json& j);

nlohmann::json tensor_to_json(const TensorRep& w);
TensorRep tensor_from_json(const nlohmann::json& j);

CMatrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const CMatrix& m);
FormFamily load_family(const std::string& path);
TensorRep load_tensor(const std::string& path);
nlohmann::json load_json(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);

}  // namespace formdecomp
