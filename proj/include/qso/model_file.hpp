#pragma once

#include <optional>
#include <string>
#include <variant>

#include "qso/construct.hpp"
#include "qso/model.hpp"

namespace qso {

// A model file declares exactly one of:
//   - graph + alphabet(s) + measures  (generated operator),
//   - tensor                          (explicit cubic heredity tensor),
//   - skew                            (bare Volterra coefficient matrix).
// JSON, one experiment per file; see README for the schema.
struct ModelFile {
    std::variant<ModelSpec, HeredityTensor, SkewMatrix> content;

    bool has_model() const { return std::holds_alternative<ModelSpec>(content); }
    bool has_tensor() const { return std::holds_alternative<HeredityTensor>(content); }
    bool has_skew() const { return std::holds_alternative<SkewMatrix>(content); }

    const ModelSpec& model() const { return std::get<ModelSpec>(content); }
    const HeredityTensor& tensor() const { return std::get<HeredityTensor>(content); }
    const SkewMatrix& skew() const { return std::get<SkewMatrix>(content); }
};

ModelFile load_model_file(const std::string& path);
ModelFile parse_model_file(const std::string& json_text);

// Serializations (used by exports, verification reproducers and round-trips).
std::string model_to_json(const ModelSpec& model);
std::string tensor_to_json(const HeredityTensor& t);
void write_tensor_json(const HeredityTensor& t, const std::string& path);

}  // namespace qso
