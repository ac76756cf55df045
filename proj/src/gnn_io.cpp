#include "gerk/config_json.hpp"
#include "gerk/error.hpp"
#include "gerk/gnn.hpp"
#include "json_util.hpp"

namespace gerk {

namespace {

detail::Json vector_to_json(const Vector& v) { return std::vector<Scalar>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const detail::Json& j) {
  const auto data = j.get<std::vector<Scalar>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size()));
}

}  // namespace

void save_model(const GnnModel& model, const std::filesystem::path& path) {
  detail::Json doc;
  doc["format"] = kModelFormat;
  doc["config"] = model.config;
  doc["input_dim"] = model.input_dim;
  doc["num_classes"] = model.num_classes;
  auto& layers = doc["layers"] = detail::Json::array();
  for (const auto& layer : model.layers) {
    detail::Json l;
    l["w_self"] = detail::matrix_to_json(layer.w_self);
    l["w_neigh"] = detail::matrix_to_json(layer.w_neigh);
    if (model.config.aggregator == Aggregator::kGat) {
      l["att_w"] = detail::matrix_to_json(layer.att_w);
      l["att_a"] = vector_to_json(layer.att_a);
    }
    if (model.config.updater == Updater::kInterpolation) {
      l["alpha1"] = layer.alpha1;
      l["alpha2"] = layer.alpha2;
    }
    layers.push_back(std::move(l));
  }
  doc["classifier"] = detail::matrix_to_json(model.classifier);
  doc["classifier_bias"] = vector_to_json(model.classifier_bias);
  doc["loss_trace"] = model.loss_trace;
  detail::write_document(path, doc);
}

GnnModel load_model(const std::filesystem::path& path) {
  const auto doc = detail::read_document(path);
  detail::expect_format(doc, kModelFormat, path);
  GnnModel model;
  try {
    doc.at("config").get_to(model.config);
    model.config.validate();
    model.input_dim = doc.at("input_dim").get<int>();
    model.num_classes = doc.at("num_classes").get<int>();
    for (const auto& l : doc.at("layers")) {
      GnnLayer layer;
      layer.w_self = detail::matrix_from_json(l.at("w_self"));
      layer.w_neigh = detail::matrix_from_json(l.at("w_neigh"));
      if (l.contains("att_w")) {
        layer.att_w = detail::matrix_from_json(l.at("att_w"));
        layer.att_a = vector_from_json(l.at("att_a"));
      }
      layer.alpha1 = l.value("alpha1", 0.5);
      layer.alpha2 = l.value("alpha2", 0.5);
      model.layers.push_back(std::move(layer));
    }
    model.classifier = detail::matrix_from_json(doc.at("classifier"));
    model.classifier_bias = vector_from_json(doc.at("classifier_bias"));
    model.loss_trace = doc.at("loss_trace").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (static_cast<int>(model.layers.size()) != model.config.layers ||
      model.classifier.cols() != model.num_classes) {
    throw ConfigError(path.string() + ": parameter shapes do not match the config");
  }
  return model;
}

}  // namespace gerk
