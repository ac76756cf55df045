#include "gerk/config_json.hpp"

#include <set>
#include <string>

#include "gerk/error.hpp"

namespace gerk {

namespace {

using Json = nlohmann::json;

void check_keys(const Json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " config must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(std::string("unknown ") + what + " key '" + key + "'");
  }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename Enum, typename Parse>
void read_enum(const Json& j, const char* key, Enum& out, Parse parse) {
  std::string s;
  if (!j.contains(key)) return;
  read(j, key, s);
  out = parse(s);
}

}  // namespace

void to_json(Json& j, const GnnConfig& c) {
  j = {{"aggregator", to_string(c.aggregator)},
       {"updater", to_string(c.updater)},
       {"layers", c.layers},
       {"hidden_dim", c.hidden_dim},
       {"epochs", c.epochs},
       {"learning_rate", c.learning_rate},
       {"momentum", c.momentum},
       {"weight_decay", c.weight_decay},
       {"grad_clip", c.grad_clip},
       {"seed", c.seed},
       {"gat_leaky", c.gat_leaky}};
}

void from_json(const Json& j, GnnConfig& c) {
  check_keys(j, {"aggregator", "updater", "layers", "hidden_dim", "epochs", "learning_rate", "momentum",
                 "weight_decay", "grad_clip", "seed", "gat_leaky"},
             "gnn");
  read_enum(j, "aggregator", c.aggregator, parse_aggregator);
  read_enum(j, "updater", c.updater, parse_updater);
  read(j, "layers", c.layers);
  read(j, "hidden_dim", c.hidden_dim);
  read(j, "epochs", c.epochs);
  read(j, "learning_rate", c.learning_rate);
  read(j, "momentum", c.momentum);
  read(j, "weight_decay", c.weight_decay);
  read(j, "grad_clip", c.grad_clip);
  read(j, "seed", c.seed);
  read(j, "gat_leaky", c.gat_leaky);
}

void to_json(Json& j, const PartitionConfig& c) {
  j = {{"method", to_string(c.method)},
       {"k", c.k},
       {"gamma", c.gamma},
       {"max_iterations", c.max_iterations},
       {"seed", c.seed},
       {"bekm_tol", c.bekm_tol},
       {"bekm_init", to_string(c.bekm_init)},
       {"blpa_scan", c.blpa_scan == BlpaScan::kRebuild ? "rebuild" : "move"},
       {"blpa_strict_improve", c.blpa_strict_improve}};
}

void from_json(const Json& j, PartitionConfig& c) {
  check_keys(j, {"method", "k", "gamma", "max_iterations", "seed", "bekm_tol", "bekm_init", "blpa_scan",
                 "blpa_strict_improve"},
             "partition");
  read_enum(j, "method", c.method, parse_partition_method);
  read(j, "k", c.k);
  read(j, "gamma", c.gamma);
  read(j, "max_iterations", c.max_iterations);
  read(j, "seed", c.seed);
  read(j, "bekm_tol", c.bekm_tol);
  read_enum(j, "bekm_init", c.bekm_init, parse_bekm_init);
  read_enum(j, "blpa_scan", c.blpa_scan, [](const std::string& s) {
    if (s == "rebuild") return BlpaScan::kRebuild;
    if (s == "move") return BlpaScan::kMove;
    throw ConfigError("unknown blpa_scan '" + s + "'");
  });
  read(j, "blpa_strict_improve", c.blpa_strict_improve);
}

void to_json(Json& j, const OptAggrConfig& c) {
  j = {{"lambda", c.lambda},           {"learning_rate", c.learning_rate}, {"epochs", c.epochs},
       {"subset_frac", c.subset_frac}, {"seed", c.seed},                   {"clamp", c.clamp}};
}

void from_json(const Json& j, OptAggrConfig& c) {
  check_keys(j, {"lambda", "learning_rate", "epochs", "subset_frac", "seed", "clamp"}, "opt_aggr");
  read(j, "lambda", c.lambda);
  read(j, "learning_rate", c.learning_rate);
  read(j, "epochs", c.epochs);
  read(j, "subset_frac", c.subset_frac);
  read(j, "seed", c.seed);
  read(j, "clamp", c.clamp);
}

void to_json(Json& j, const MlpConfig& c) {
  j = {{"hidden_dim", c.hidden_dim}, {"epochs", c.epochs},         {"learning_rate", c.learning_rate},
       {"momentum", c.momentum},     {"weight_decay", c.weight_decay}, {"grad_clip", c.grad_clip},
       {"seed", c.seed}};
}

void from_json(const Json& j, MlpConfig& c) {
  check_keys(j, {"hidden_dim", "epochs", "learning_rate", "momentum", "weight_decay", "grad_clip", "seed"}, "mlp");
  read(j, "hidden_dim", c.hidden_dim);
  read(j, "epochs", c.epochs);
  read(j, "learning_rate", c.learning_rate);
  read(j, "momentum", c.momentum);
  read(j, "weight_decay", c.weight_decay);
  read(j, "grad_clip", c.grad_clip);
  read(j, "seed", c.seed);
}

void to_json(Json& j, const EraserConfig& c) {
  j = {{"partition", c.partition},  {"gnn", c.gnn},
       {"opt_aggr", c.opt_aggr},    {"fit_scores", c.fit_scores},
       {"inference", to_string(c.inference)}, {"threads", c.threads}};
}

void from_json(const Json& j, EraserConfig& c) {
  check_keys(j, {"partition", "gnn", "opt_aggr", "fit_scores", "inference", "threads"}, "eraser");
  if (j.contains("partition")) from_json(j.at("partition"), c.partition);
  if (j.contains("gnn")) from_json(j.at("gnn"), c.gnn);
  if (j.contains("opt_aggr")) from_json(j.at("opt_aggr"), c.opt_aggr);
  read(j, "fit_scores", c.fit_scores);
  read_enum(j, "inference", c.inference, parse_inference_policy);
  read(j, "threads", c.threads);
}

void to_json(Json& j, const SbmSpec& s) {
  j = {{"blocks", s.blocks},
       {"p_in", s.p_in},
       {"p_out", s.p_out},
       {"feature_dim", s.feature_dim},
       {"label_rule", to_string(s.label_rule)},
       {"num_classes", s.num_classes},
       {"sub_blocks", s.sub_blocks},
       {"p_mix", s.p_mix},
       {"sub_block_feature_scale", s.sub_block_feature_scale},
       {"feature_noise", s.feature_noise},
       {"centroid_scale", s.centroid_scale},
       {"seed", s.seed}};
}

void from_json(const Json& j, SbmSpec& s) {
  check_keys(j, {"blocks", "p_in", "p_out", "feature_dim", "label_rule", "num_classes", "sub_blocks", "p_mix",
                 "sub_block_feature_scale", "feature_noise", "centroid_scale", "seed"},
             "sbm");
  read(j, "blocks", s.blocks);
  read(j, "p_in", s.p_in);
  read(j, "p_out", s.p_out);
  read(j, "feature_dim", s.feature_dim);
  read_enum(j, "label_rule", s.label_rule, parse_sbm_label_rule);
  read(j, "num_classes", s.num_classes);
  read(j, "sub_blocks", s.sub_blocks);
  read(j, "p_mix", s.p_mix);
  read(j, "sub_block_feature_scale", s.sub_block_feature_scale);
  read(j, "feature_noise", s.feature_noise);
  read(j, "centroid_scale", s.centroid_scale);
  read(j, "seed", s.seed);
}

}  // namespace gerk
