#pragma once

// JSON wire format for the generator service. Images travel as base64 PNG;
// grayscale payloads (edge map, masks) as 1-channel PNG, color payloads as
// RGB PNG. Keys are emitted in protocol order and the output is compact, so
// a given request always serializes to the same bytes.

#include "json.hpp"

#include <string>

#include "meshtex/base64.hpp"
#include "meshtex/generator.hpp"
#include "meshtex/png_io.hpp"

namespace meshtex::wire {

using Json = nlohmann::ordered_json;

template <int C, class Tag>
std::string image_to_b64(const Image<std::uint8_t, C, Tag>& img) {
    return base64::encode(encode_png(img));
}

template <class ImageT>
ImageT image_from_b64(const std::string& text, const char* field) {
    try {
        return decode_png<ImageT>(base64::decode(text));
    } catch (const std::exception& e) {
        throw SchemaError(std::string(field) + ": " + e.what());
    }
}

inline Json encode_generate_request(const GeneratorRequest& req) {
    Json j;
    j["edge_map"] = image_to_b64(req.edge_map);
    j["foreground_mask"] = image_to_b64(req.foreground_mask);
    j["reference_image"] = image_to_b64(req.reference_image);
    j["prompt"] = req.prompt;
    j["negative_prompt"] = req.negative_prompt;
    j["lambda_ip"] = req.lambda_ip;
    j["lambda_cn"] = req.lambda_cn;
    j["seed"] = req.seed;
    j["width"] = req.width;
    j["height"] = req.height;
    j["keep_image"] = req.keep_image ? Json(image_to_b64(*req.keep_image)) : Json(nullptr);
    j["keep_mask"] = req.keep_mask ? Json(image_to_b64(*req.keep_mask)) : Json(nullptr);
    j["concept_id"] = req.concept_id ? Json(*req.concept_id) : Json(nullptr);
    return j;
}

namespace detail {

inline const Json& field(const Json& j, const char* name) {
    if (!j.is_object()) throw SchemaError("payload is not a JSON object");
    const auto it = j.find(name);
    if (it == j.end()) throw SchemaError(std::string("missing field '") + name + "'");
    return *it;
}

inline std::string str_field(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_string()) throw SchemaError(std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

inline std::int64_t int_field(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_number_integer()) throw SchemaError(std::string("field '") + name + "' must be an integer");
    return v.get<std::int64_t>();
}

inline double num_field(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_number()) throw SchemaError(std::string("field '") + name + "' must be a number");
    return v.get<double>();
}

inline bool is_null_or_absent(const Json& j, const char* name) {
    const auto it = j.find(name);
    return it == j.end() || it->is_null();
}

}  // namespace detail

inline GeneratorRequest decode_generate_request(const Json& j) {
    GeneratorRequest req;
    req.edge_map = image_from_b64<EdgeMap>(detail::str_field(j, "edge_map"), "edge_map");
    req.foreground_mask = image_from_b64<BinaryImage>(detail::str_field(j, "foreground_mask"), "foreground_mask");
    req.reference_image = image_from_b64<RgbImage>(detail::str_field(j, "reference_image"), "reference_image");
    req.prompt = detail::str_field(j, "prompt");
    req.negative_prompt = detail::str_field(j, "negative_prompt");
    req.lambda_ip = detail::num_field(j, "lambda_ip");
    req.lambda_cn = detail::num_field(j, "lambda_cn");
    req.seed = detail::int_field(j, "seed");
    req.width = static_cast<int>(detail::int_field(j, "width"));
    req.height = static_cast<int>(detail::int_field(j, "height"));
    if (!detail::is_null_or_absent(j, "keep_image"))
        req.keep_image = image_from_b64<RgbImage>(detail::str_field(j, "keep_image"), "keep_image");
    if (!detail::is_null_or_absent(j, "keep_mask"))
        req.keep_mask = image_from_b64<BinaryImage>(detail::str_field(j, "keep_mask"), "keep_mask");
    if (!detail::is_null_or_absent(j, "concept_id")) req.concept_id = detail::str_field(j, "concept_id");
    return req;
}

inline Json encode_generate_response(const GeneratorResponse& resp) {
    Json j;
    j["image"] = image_to_b64(resp.image);
    j["seed_used"] = resp.seed_used;
    j["backend"] = resp.backend;
    return j;
}

/// Decodes a /generate response and checks it against the request dimensions.
inline GeneratorResponse decode_generate_response(const Json& j, int width, int height) {
    GeneratorResponse resp;
    resp.image = image_from_b64<RgbImage>(detail::str_field(j, "image"), "image");
    resp.seed_used = detail::int_field(j, "seed_used");
    resp.backend = detail::str_field(j, "backend");
    if (!resp.image.same_size(width, height))
        throw SchemaError("response image is " + std::to_string(resp.image.width()) + "x" +
                          std::to_string(resp.image.height()) + ", requested " + std::to_string(width) + "x" +
                          std::to_string(height));
    return resp;
}

struct InvertRequest {
    RgbImage image;
    int steps = 100;
    std::int64_t seed = 0;
};

inline Json encode_invert_request(const InvertRequest& req) {
    Json j;
    j["image"] = image_to_b64(req.image);
    j["steps"] = req.steps;
    j["seed"] = req.seed;
    return j;
}

inline InvertRequest decode_invert_request(const Json& j) {
    InvertRequest req;
    req.image = image_from_b64<RgbImage>(detail::str_field(j, "image"), "image");
    req.steps = static_cast<int>(detail::int_field(j, "steps"));
    req.seed = detail::int_field(j, "seed");
    return req;
}

inline std::string decode_invert_response(const Json& j) { return detail::str_field(j, "concept_id"); }

}  // namespace meshtex::wire
