#include <fstream>
#include <iterator>

#include "eraser_state.hpp"
#include "gerk/config_json.hpp"
#include "gerk/error.hpp"
#include "gerk/hash.hpp"
#include "json_util.hpp"

namespace gerk {

namespace {

constexpr const char* kCheckpointFormat = "gerk-checkpoint-v1";

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Fnv1a h;
  h.add(bytes);
  return h.value();
}

std::string hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

std::string shard_file(int i) { return "shard_" + std::to_string(i) + ".model"; }

detail::Json request_to_json(const UnlearnRequest& r) {
  return {{"kind", r.kind == RequestKind::kNode ? "node" : "edge"}, {"u", r.u}, {"v", r.v}};
}

UnlearnRequest request_from_json(const detail::Json& j) {
  UnlearnRequest r;
  r.kind = j.at("kind").get<std::string>() == "node" ? RequestKind::kNode : RequestKind::kEdge;
  r.u = j.at("u").get<NodeId>();
  r.v = j.at("v").get<NodeId>();
  return r;
}

}  // namespace

void Eraser::save(const std::filesystem::path& dir) const {
  std::lock_guard writer(s_->writer);
  const State::Snapshot snap = s_->snapshot();
  const GraphView& view = *snap.view;
  std::filesystem::create_directories(dir);

  detail::Json manifest;
  manifest["format"] = kCheckpointFormat;
  manifest["config"] = s_->cfg;
  manifest["original_count"] = view.row.size();
  manifest["original_ids"] = view.original;
  manifest["train"] = view.train;
  manifest["initial_train_count"] = s_->initial_train_count;
  manifest["build_seconds"] = s_->build_seconds;
  auto& log = manifest["deletion_log"] = detail::Json::array();
  for (const auto& r : s_->log) log.push_back(request_to_json(r));

  const auto& init = s_->initial_assignment;
  manifest["initial_assignment"] = {{"k", init.k},
                                    {"delta", init.delta},
                                    {"method", to_string(init.method)},
                                    {"seed", init.seed},
                                    {"assign", init.assign},
                                    {"iterations_run", init.iterations_run},
                                    {"converged", init.converged}};

  save_graph(view.graph, dir / "graph.bin");

  ShardAssignment current = init;
  current.assign.clear();
  for (std::size_t r = 0; r < view.train.size(); ++r) {
    if (view.train[r]) current.assign.push_back(view.shard[r]);
  }
  save_assignment(current, dir / "assignment.json");

  auto& shards = manifest["shards"] = detail::Json::array();
  for (std::size_t i = 0; i < snap.shards.size(); ++i) {
    const Shard& sh = *snap.shards[i];
    detail::Json entry = {{"members", sh.members},
                          {"stub", sh.stub},
                          {"seed", sh.seed},
                          {"graph_hash", hex(sh.record.graph_hash)},
                          {"param_hash", hex(sh.record.param_hash)},
                          {"record_seed", sh.record.seed}};
    if (!sh.stub) save_model(sh.model, dir / shard_file(static_cast<int>(i)));
    shards.push_back(std::move(entry));
  }
  if (snap.scores) save_scores(*snap.scores, dir / "scores.json");

  auto& files = manifest["files"] = detail::Json::object();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name != "manifest.json") files[name] = hex(file_hash(entry.path()));
  }
  detail::write_document(dir / "manifest.json", manifest);
}

Eraser Eraser::load(const std::filesystem::path& dir) {
  const detail::Json manifest = detail::read_document(dir / "manifest.json");
  detail::expect_format(manifest, kCheckpointFormat, dir / "manifest.json");
  auto state = std::make_unique<State>();
  try {
    for (const auto& [name, digest] : manifest.at("files").items()) {
      if (hex(file_hash(dir / name)) != digest.get<std::string>()) {
        throw InvariantError("checkpoint file " + name + " does not match its manifest hash");
      }
    }
    from_json(manifest.at("config"), state->cfg);
    state->cfg.validate();
    state->initial_train_count = manifest.at("initial_train_count").get<std::size_t>();
    state->build_seconds = manifest.at("build_seconds").get<double>();
    for (const auto& r : manifest.at("deletion_log")) state->log.push_back(request_from_json(r));

    const auto& ia = manifest.at("initial_assignment");
    ShardAssignment& init = state->initial_assignment;
    init.k = ia.at("k").get<int>();
    init.delta = ia.at("delta").get<NodeId>();
    init.method = parse_partition_method(ia.at("method").get<std::string>());
    init.seed = ia.at("seed").get<std::uint64_t>();
    init.assign = ia.at("assign").get<std::vector<ShardId>>();
    init.iterations_run = ia.at("iterations_run").get<int>();
    init.converged = ia.at("converged").get<bool>();

    const Graph graph = load_graph_snapshot(dir / "graph.bin");
    const auto train = manifest.at("train").get<std::vector<char>>();
    const ShardAssignment current = load_assignment(dir / "assignment.json");
    if (train.size() != static_cast<std::size_t>(graph.num_nodes())) throw InvariantError("role mask size mismatch");
    std::vector<ShardId> shard(train.size(), -1);
    std::size_t t = 0;
    for (std::size_t r = 0; r < train.size(); ++r) {
      if (!train[r]) continue;
      if (t >= current.assign.size()) throw InvariantError("assignment is shorter than the training set");
      shard[r] = current.assign[t++];
    }
    if (t != current.assign.size()) throw InvariantError("assignment is longer than the training set");
    auto view = std::make_shared<GraphView>(detail::make_view(graph, manifest.at("original_ids").get<NodeList>(),
                                                              manifest.at("original_count").get<std::size_t>(),
                                                              train, shard));

    int i = 0;
    for (const auto& entry : manifest.at("shards")) {
      Shard sh;
      sh.members = entry.at("members").get<NodeList>();
      sh.stub = entry.at("stub").get<bool>();
      sh.seed = entry.at("seed").get<std::uint64_t>();
      sh.record.graph_hash = std::stoull(entry.at("graph_hash").get<std::string>(), nullptr, 16);
      sh.record.param_hash = std::stoull(entry.at("param_hash").get<std::string>(), nullptr, 16);
      sh.record.seed = entry.at("record_seed").get<std::uint64_t>();
      NodeList rows;
      for (NodeId u : sh.members) {
        if (u < 0 || static_cast<std::size_t>(u) >= view->row.size() || view->row[static_cast<std::size_t>(u)] < 0) {
          throw InvariantError("shard member " + std::to_string(u) + " is not in the graph");
        }
        rows.push_back(view->row[static_cast<std::size_t>(u)]);
      }
      sh.graph = induced_subgraph(view->graph, rows).graph;
      if (!sh.stub) sh.model = load_model(dir / shard_file(i));
      state->shards.push_back(std::make_shared<const Shard>(std::move(sh)));
      ++i;
    }
    state->view = view;
    if (std::filesystem::exists(dir / "scores.json")) {
      state->scores = std::make_shared<const ImportanceScores>(load_scores(dir / "scores.json"));
      state->cache.nodes = state->scores->score_train_nodes;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError((dir / "manifest.json").string() + ": " + e.what());
  }
  return Eraser(std::move(state));
}

}  // namespace gerk
