// gerk: command-line front end for sharded training, unlearning and benchmarks.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "gerk/bench.hpp"
#include "gerk/config_json.hpp"
#include "gerk/eraser.hpp"
#include "gerk/error.hpp"
#include "gerk/report.hpp"

using namespace gerk;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitAudit = 3;

/// TOML (CLI11 native) or JSON config files. Keys without a section are
/// attributed to the subcommand being run, so one flat file per command works.
class ConfigFile : public CLI::ConfigBase {
 public:
  std::string section;

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    std::vector<CLI::ConfigItem> items;
    if (first != std::string::npos && text[first] == '{') {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(text);
      } catch (const nlohmann::json::exception& e) {
        throw CLI::ConversionError(std::string("config: ") + e.what());
      }
      flatten(doc, {}, items);
    } else {
      std::istringstream again(text);
      items = CLI::ConfigBase::from_config(again);
    }
    for (auto& item : items) {
      if (item.parents.empty() && !section.empty()) item.parents = {section};
    }
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  static void flatten(const nlohmann::json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto p = parents;
        p.push_back(key);
        flatten(value, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      out.push_back(std::move(item));
    }
  }
};

struct Options {
  // dataset
  std::string graph, nodes, edges;
  std::vector<NodeId> blocks{500, 500, 500, 500};
  double p_in = 0.02, p_out = 0.002, p_mix = 0.0, feature_noise = 3.0, centroid_scale = 1.0,
         sub_block_feature_scale = 0.0;
  int feature_dim = 16, num_classes = 0, sub_blocks = 1;
  std::string sbm_labels = "block";
  std::uint64_t sbm_seed = 0;
  // enums and lists as text
  std::vector<std::string> methods{"random", "blpa", "bekm"};
  std::string method = "blpa";
  std::vector<std::string> modes{"optimal"};
  std::string aggregator = "sage", updater = "linear", inference = "shard-local", request_kind = "node",
              blpa_scan = "rebuild", bekm_init = "sample";
  bool no_clamp = false, macro_f1 = false;
  std::string out;
  BenchConfig cfg;
};

void add_dataset_options(CLI::App* app, Options& o) {
  app->add_option("--graph", o.graph, "graph snapshot (from ingest or sbm)");
  app->add_option("--nodes", o.nodes, "node CSV: id,label,f0,...");
  app->add_option("--edges", o.edges, "whitespace edge list");
  app->add_option("--blocks", o.blocks, "SBM block sizes")->capture_default_str();
  app->add_option("--p-in", o.p_in, "SBM within-block edge probability")->capture_default_str();
  app->add_option("--p-out", o.p_out, "SBM cross-block edge probability")->capture_default_str();
  app->add_option("--feature-dim", o.feature_dim, "SBM feature width")->capture_default_str();
  app->add_option("--feature-noise", o.feature_noise, "SBM feature noise scale")->capture_default_str();
  app->add_option("--centroid-scale", o.centroid_scale, "SBM class centroid scale")->capture_default_str();
  app->add_option("--sbm-labels", o.sbm_labels, "block | uniform")->capture_default_str();
  app->add_option("--num-classes", o.num_classes, "classes for uniform labels (0: one per block)");
  app->add_option("--sub-blocks", o.sub_blocks, "SBM communities per block")->capture_default_str();
  app->add_option("--p-mix", o.p_mix, "SBM within-block edge probability across communities");
  app->add_option("--sub-block-feature-scale", o.sub_block_feature_scale, "SBM per-community feature offset scale");
  app->add_option("--sbm-seed", o.sbm_seed, "SBM generator seed")->capture_default_str();
}

void add_partition_options(CLI::App* app, Options& o) {
  auto& p = o.cfg.eraser.partition;
  app->add_option("--k", p.k, "number of shards")->capture_default_str();
  app->add_option("--gamma", p.gamma, "capacity factor, delta = ceil(gamma n / k)")->capture_default_str();
  app->add_option("--max-iter", p.max_iterations, "BLPA / BEKM iteration cap")->capture_default_str();
  app->add_option("--bekm-tol", p.bekm_tol, "BEKM centroid-shift tolerance")->capture_default_str();
  app->add_option("--blpa-scan", o.blpa_scan, "rebuild | move")->capture_default_str();
  app->add_option("--bekm-init", o.bekm_init, "sample | plus-plus")->capture_default_str();
  app->add_flag("--blpa-strict-improve", p.blpa_strict_improve, "move scan: only strictly improving moves");
}

void add_gnn_options(CLI::App* app, Options& o) {
  auto& g = o.cfg.eraser.gnn;
  app->add_option("--aggregator", o.aggregator, "gin | sage | gcn | gat")->capture_default_str();
  app->add_option("--updater", o.updater, "linear | concat | interpolation")->capture_default_str();
  app->add_option("--layers", g.layers)->capture_default_str();
  app->add_option("--hidden", g.hidden_dim)->capture_default_str();
  app->add_option("--epochs", g.epochs)->capture_default_str();
  app->add_option("--lr", g.learning_rate)->capture_default_str();
  app->add_option("--momentum", g.momentum)->capture_default_str();
  app->add_option("--weight-decay", g.weight_decay)->capture_default_str();
  app->add_option("--grad-clip", g.grad_clip, "gradient-norm cap, 0 disables")->capture_default_str();
  app->add_flag("--gat-leaky", g.gat_leaky, "LeakyReLU inside the attention logit");
}

void add_score_options(CLI::App* app, Options& o) {
  auto& s = o.cfg.eraser.opt_aggr;
  app->add_option("--lambda", s.lambda, "importance-score regularisation")->capture_default_str();
  app->add_option("--score-lr", s.learning_rate)->capture_default_str();
  app->add_option("--score-epochs", s.epochs)->capture_default_str();
  app->add_option("--subset-frac", s.subset_frac, "fraction of training nodes used to fit scores")->capture_default_str();
  app->add_flag("--no-clamp", o.no_clamp, "skip projecting negative pre-scores to 0");
  app->add_option("--inference", o.inference, "shard-local | global-ego")->capture_default_str();
  app->add_option("--threads", o.cfg.eraser.threads, "shard workers, 0 = all cores")->capture_default_str();
}

void add_run_options(CLI::App* app, Options& o) {
  app->add_option("--seed", o.cfg.seed, "base seed")->capture_default_str();
  app->add_option("--train-ratio", o.cfg.train_ratio)->capture_default_str();
  app->add_flag("--stratified", o.cfg.stratified_split, "stratify the train/test split by label");
  app->add_flag("--macro-f1", o.macro_f1, "report macro-F1 instead of micro-F1");
}

void add_bench_options(CLI::App* app, Options& o) {
  add_dataset_options(app, o);
  add_partition_options(app, o);
  add_gnn_options(app, o);
  add_score_options(app, o);
  add_run_options(app, o);
  app->add_option("--methods", o.methods, "partition methods")->capture_default_str();
  app->add_option("--modes", o.modes, "aggregation modes: mean majority optimal")->capture_default_str();
  app->add_option("--n-requests", o.cfg.n_requests)->capture_default_str();
  app->add_option("--request-kind", o.request_kind, "node | edge")->capture_default_str();
  app->add_option("--repetitions", o.cfg.repetitions)->capture_default_str();
  app->add_option("--scratch-requests", o.cfg.scratch_requests, "requests whose scratch retrain is timed")
      ->capture_default_str();
  app->add_option("--mlp-hidden", o.cfg.mlp.hidden_dim)->capture_default_str();
  app->add_option("--mlp-epochs", o.cfg.mlp.epochs)->capture_default_str();
  app->add_option("--mlp-lr", o.cfg.mlp.learning_rate)->capture_default_str();
  app->add_option("--threshold", o.cfg.guideline_threshold, "guideline F1 gap threshold")->capture_default_str();
  app->add_option("--k-list", o.cfg.k_list, "shard counts for sweep-shards")->capture_default_str();
  app->add_option("--counts", o.cfg.request_counts, "cumulative request counts for sweep-requests")
      ->capture_default_str();
  app->add_option("--workers", o.cfg.workers, "repetitions run concurrently")->capture_default_str();
  app->add_option("--out", o.out, "output directory")->required();
}

BenchConfig finalize(Options& o) {
  BenchConfig c = o.cfg;
  if (!o.graph.empty()) {
    c.dataset.snapshot = o.graph;
  } else if (!o.nodes.empty() || !o.edges.empty()) {
    if (o.nodes.empty() || o.edges.empty()) throw ConfigError("--nodes and --edges go together");
    c.dataset.node_file = o.nodes;
    c.dataset.edge_file = o.edges;
  } else {
    SbmSpec spec;
    spec.blocks = o.blocks;
    spec.p_in = o.p_in;
    spec.p_out = o.p_out;
    spec.feature_dim = o.feature_dim;
    spec.feature_noise = o.feature_noise;
    spec.centroid_scale = o.centroid_scale;
    spec.label_rule = parse_sbm_label_rule(o.sbm_labels);
    spec.sub_blocks = o.sub_blocks;
    spec.p_mix = o.p_mix;
    spec.sub_block_feature_scale = o.sub_block_feature_scale;
    spec.num_classes = o.num_classes;
    spec.seed = o.sbm_seed;
    validate(spec);
    c.dataset.sbm = spec;
  }
  c.methods.clear();
  for (const auto& m : o.methods) c.methods.push_back(parse_partition_method(m));
  c.modes.clear();
  for (const auto& m : o.modes) c.modes.push_back(parse_aggregation_mode(m));
  c.eraser.gnn.aggregator = parse_aggregator(o.aggregator);
  c.eraser.gnn.updater = parse_updater(o.updater);
  c.eraser.inference = parse_inference_policy(o.inference);
  c.eraser.opt_aggr.clamp = !o.no_clamp;
  if (o.blpa_scan != "rebuild" && o.blpa_scan != "move") throw ConfigError("--blpa-scan must be rebuild or move");
  c.eraser.partition.blpa_scan = o.blpa_scan == "rebuild" ? BlpaScan::kRebuild : BlpaScan::kMove;
  c.eraser.partition.bekm_init = parse_bekm_init(o.bekm_init);
  if (o.request_kind != "node" && o.request_kind != "edge") throw ConfigError("--request-kind must be node or edge");
  c.request_kind = o.request_kind == "node" ? RequestKind::kNode : RequestKind::kEdge;
  c.f1_average = o.macro_f1 ? F1Average::kMacro : F1Average::kMicro;
  c.validate();
  return c;
}

void print_tables(const Report& r) {
  for (const auto& t : r.tables) {
    std::vector<std::size_t> width(t.header.size(), 0);
    for (std::size_t i = 0; i < t.header.size(); ++i) width[i] = t.header[i].size();
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size() && i < width.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::cout << "# " << t.name << '\n';
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size() && i < width.size(); ++i) {
        std::cout << cells[i] << std::string(width[i] - cells[i].size() + 2, ' ');
      }
      std::cout << '\n';
    };
    line(t.header);
    for (const auto& row : t.rows) line(row);
  }
}

int emit(const Report& r, const std::string& out, bool ok) {
  write_report(r, out);
  print_tables(r);
  std::cout << "report written to " << out << "/report.json\n";
  return ok ? 0 : kExitAudit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph unlearning toolkit: balanced shards, per-shard GNNs, exact unlearning."};
  app.require_subcommand(1);
  auto config = std::make_shared<ConfigFile>();
  app.config_formatter(config);
  app.set_config("--config", "", "TOML or JSON file of option values; explicit flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Options o;
  int status = 0;
  std::vector<CLI::App*> subs;
  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    subs.push_back(s);
    return s;
  };

  // ingest
  std::string snapshot_out;
  auto* ingest = sub("ingest", "load a node CSV and edge list into a graph snapshot");
  ingest->add_option("--nodes", o.nodes)->required();
  ingest->add_option("--edges", o.edges)->required();
  ingest->add_option("--out", snapshot_out, "snapshot path (.json for text, anything else CBOR)")->required();
  ingest->callback([&] {
    const auto loaded = load_graph(o.nodes, o.edges);
    save_graph(loaded.graph, snapshot_out);
    std::cout << "nodes " << loaded.graph.num_nodes() << " edges " << loaded.graph.num_edges() << " classes "
              << loaded.graph.num_classes << " features " << loaded.graph.feature_dim() << "\ndropped self-loops "
              << loaded.cleanup.self_loops << " duplicate edges " << loaded.cleanup.duplicates << '\n';
  });

  // sbm
  std::string nodes_out, edges_out;
  auto* sbm = sub("sbm", "generate a stochastic block model graph");
  add_dataset_options(sbm, o);
  sbm->add_option("--out", snapshot_out, "snapshot path")->required();
  sbm->add_option("--nodes-out", nodes_out, "also write the node CSV");
  sbm->add_option("--edges-out", edges_out, "also write the edge list");
  sbm->callback([&] {
    o.graph.clear();
    o.nodes.clear();
    o.edges.clear();
    const BenchConfig c = finalize(o);
    const Graph g = generate_sbm(*c.dataset.sbm);
    save_graph(g, snapshot_out);
    if (!nodes_out.empty() || !edges_out.empty()) {
      if (nodes_out.empty() || edges_out.empty()) throw ConfigError("--nodes-out and --edges-out go together");
      write_graph_files(g, nodes_out, edges_out);
    }
    std::cout << "nodes " << g.num_nodes() << " edges " << g.num_edges() << " classes " << g.num_classes << '\n';
  });

  // partition
  std::string assignment_out;
  auto* part = sub("partition", "partition every node of a graph into balanced shards");
  add_dataset_options(part, o);
  add_partition_options(part, o);
  add_gnn_options(part, o);
  part->add_option("--method", o.method, "random | blpa | bekm")->capture_default_str();
  part->add_option("--seed", o.cfg.seed)->capture_default_str();
  part->add_option("--out", assignment_out, "assignment JSON")->required();
  part->callback([&] {
    const BenchConfig c = finalize(o);
    const Graph g = c.dataset.load(0);
    PartitionConfig pc = c.eraser.partition;
    pc.method = parse_partition_method(o.method);
    pc.seed = c.seed;
    ShardAssignment a;
    if (pc.method == PartitionMethod::kBekm) {
      GnnConfig gc = c.eraser.gnn;
      gc.seed = c.seed;
      const Matrix emb = node_embeddings(g, gc);
      a = partition(g, &emb, pc);
    } else {
      a = partition(g, nullptr, pc);
    }
    validate(a, g.num_nodes());
    save_assignment(a, assignment_out);
    std::cout << "method " << to_string(a.method) << " k " << a.k << " delta " << a.delta << " iterations "
              << a.iterations_run << (a.converged ? " converged" : " not converged") << "\nwithin-shard edges "
              << within_shard_edges(g, a.assign) << " of " << g.num_edges() << "\nsizes";
    for (NodeId s : a.shard_sizes()) std::cout << ' ' << s;
    std::cout << '\n';
  });

  // train
  std::string checkpoint;
  auto* trn = sub("train", "partition, train every shard model and save a checkpoint");
  add_dataset_options(trn, o);
  add_partition_options(trn, o);
  add_gnn_options(trn, o);
  add_score_options(trn, o);
  add_run_options(trn, o);
  trn->add_option("--method", o.method, "random | blpa | bekm")->capture_default_str();
  trn->add_option("--out", checkpoint, "checkpoint directory")->required();
  trn->callback([&] {
    const BenchConfig c = finalize(o);
    const Workload w = make_workload(c, 0);
    EraserConfig ec = c.eraser_for(0, parse_partition_method(o.method));
    ec.fit_scores = true;
    const Eraser eraser = Eraser::build(w.graph, w.split, ec);
    eraser.save(checkpoint);
    const NodeList test = eraser.test_nodes();
    const LabelList truth = labels_of(w.graph, test);
    std::cout << "shards " << eraser.num_shards() << " built in " << eraser.build_seconds() << " s\n";
    for (auto mode : {AggregationMode::kMean, AggregationMode::kMajority, AggregationMode::kOptimal}) {
      std::cout << "test F1 (" << to_string(mode) << ") " << f1_score(eraser.predict(test, mode), truth, c.f1_average)
                << '\n';
    }
    const AuditReport audit = eraser.audit();
    std::cout << audit.summary();
    status = audit.passed() ? 0 : kExitAudit;
  });

  // unlearn
  std::vector<NodeId> unlearn_nodes;
  std::vector<NodeId> unlearn_edges;
  std::string unlearn_out;
  auto* unl = sub("unlearn", "apply node or edge unlearning requests to a checkpoint");
  unl->add_option("--checkpoint", checkpoint)->required();
  unl->add_option("--node", unlearn_nodes, "node ids to unlearn");
  unl->add_option("--edge", unlearn_edges, "edge endpoints to unlearn, two ids per edge")->expected(2)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  unl->add_option("--out", unlearn_out, "write the updated checkpoint here instead of in place");
  unl->callback([&] {
    if (unlearn_edges.size() % 2 != 0) throw ConfigError("--edge needs two node ids");
    Eraser eraser = Eraser::load(checkpoint);
    std::vector<UnlearnRequest> requests;
    for (NodeId u : unlearn_nodes) requests.push_back(UnlearnRequest::node(u));
    for (std::size_t i = 0; i < unlearn_edges.size(); i += 2) {
      requests.push_back(UnlearnRequest::edge(unlearn_edges[i], unlearn_edges[i + 1]));
    }
    for (const auto& req : requests) {
      const UnlearnReport r = eraser.unlearn(req);
      std::cout << (req.kind == RequestKind::kNode ? "node " + std::to_string(req.u)
                                                    : "edge " + std::to_string(req.u) + "-" + std::to_string(req.v))
                << " shard " << (r.affected_shard ? std::to_string(*r.affected_shard) : "none") << " retrain "
                << r.retrain_seconds << " s scores " << (r.scores_retrained ? "refit" : "kept") << " total "
                << r.total_seconds << " s\n";
    }
    eraser.save(unlearn_out.empty() ? checkpoint : unlearn_out);
    const AuditReport audit = eraser.audit();
    status = audit.passed() ? 0 : kExitAudit;
    if (!audit.passed()) std::cout << audit.summary();
  });

  // audit
  auto* aud = sub("audit", "verify every invariant of a checkpoint");
  aud->add_option("--checkpoint", checkpoint)->required();
  aud->callback([&] {
    const AuditReport audit = Eraser::load(checkpoint).audit();
    std::cout << audit.summary();
    status = audit.passed() ? 0 : kExitAudit;
  });

  // benchmarks
  auto* bu = sub("bench-unlearn", "average unlearning time against the scratch baseline");
  add_bench_options(bu, o);
  bu->callback([&] {
    const BenchConfig c = finalize(o);
    const auto r = bench_unlearn(c);
    bool ok = true;
    for (const auto& row : r.rows) ok = ok && row.audit_passed;
    status = emit(make_report(c, r), o.out, ok);
  });

  auto* eu = sub("eval-utility", "test F1 of scratch and every partition method");
  add_bench_options(eu, o);
  eu->callback([&] {
    const BenchConfig c = finalize(o);
    status = emit(make_report("eval-utility", c, eval_utility(c)), o.out, true);
  });

  auto* ca = sub("compare-agg", "mean, majority and optimal aggregation on identical shard models");
  add_bench_options(ca, o);
  ca->callback([&] {
    const BenchConfig c = finalize(o);
    status = emit(make_report("compare-agg", c, compare_aggregators(c)), o.out, true);
  });

  auto* ss = sub("sweep-shards", "unlearning time and F1 across shard counts");
  add_bench_options(ss, o);
  ss->callback([&] {
    const BenchConfig c = finalize(o);
    const auto rows = sweep_shards(c);
    bool ok = true;
    for (const auto& r : rows) ok = ok && r.balanced;
    status = emit(make_report(c, rows), o.out, ok);
  });

  auto* sr = sub("sweep-requests", "F1 after cumulative node unlearning");
  add_bench_options(sr, o);
  sr->callback([&] {
    const BenchConfig c = finalize(o);
    const auto rows = sweep_requests(c);
    bool ok = true;
    for (const auto& r : rows) ok = ok && r.audit_passed;
    status = emit(make_report(c, rows), o.out, ok);
  });

  auto* gl = sub("guideline", "recommend a partition method from the MLP-vs-GNN F1 gap");
  add_bench_options(gl, o);
  gl->callback([&] {
    const BenchConfig c = finalize(o);
    const auto r = guideline(c);
    status = emit(make_report(c, r), o.out, true);
    std::cout << "recommendation: " << to_string(r.recommendation) << " (mean gap " << r.gap.mean << ")\n";
  });

  auto* sc = sub("score-corr", "per-shard test F1 against importance score");
  add_bench_options(sc, o);
  sc->add_option("--checkpoint", checkpoint, "use a saved state instead of building one");
  sc->callback([&] {
    const BenchConfig c = finalize(o);
    ScoreCorrelation r;
    if (!checkpoint.empty()) {
      const Eraser eraser = Eraser::load(checkpoint);
      r = score_correlation(eraser, eraser.test_nodes(), c.f1_average);
    } else {
      const Workload w = make_workload(c, 0);
      EraserConfig ec = c.eraser_for(0, c.methods.front());
      ec.fit_scores = true;
      const Eraser eraser = Eraser::build(w.graph, w.split, ec);
      r = score_correlation(eraser, eraser.test_nodes(), c.f1_average);
    }
    status = emit(make_report(c, r), o.out, true);
    std::cout << "spearman " << r.spearman << '\n';
  });

  // plot
  std::string csv_path, x_col, title, svg_out;
  std::vector<std::string> y_cols;
  bool scatter = false;
  auto* pl = sub("plot", "draw CSV columns as an SVG line or scatter chart");
  pl->add_option("--csv", csv_path)->required();
  pl->add_option("--x", x_col)->required();
  pl->add_option("--y", y_cols)->required();
  pl->add_option("--title", title);
  pl->add_flag("--scatter", scatter);
  pl->add_option("--out", svg_out, "SVG path")->required();
  pl->callback([&] {
    const Table t = read_csv(csv_path);
    auto column = [&](const std::string& name) {
      const auto it = std::find(t.header.begin(), t.header.end(), name);
      if (it == t.header.end()) throw ConfigError("no column '" + name + "' in " + csv_path);
      const auto idx = static_cast<std::size_t>(it - t.header.begin());
      std::vector<double> v;
      for (const auto& row : t.rows) {
        try {
          v.push_back(idx < row.size() ? std::stod(row[idx]) : NAN);
        } catch (const std::exception&) {
          v.push_back(NAN);
        }
      }
      return v;
    };
    std::vector<ChartSeries> series;
    for (const auto& y : y_cols) series.push_back({y, column(y)});
    write_svg_chart(svg_out, title.empty() ? csv_path : title, x_col, column(x_col), series, scatter);
  });

  // Flat config keys belong to whichever subcommand is named on the command line.
  for (int i = 1; i < argc; ++i) {
    for (const CLI::App* s : subs) {
      if (s->get_name() == argv[i]) config->section = argv[i];
    }
    if (!config->section.empty()) break;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitAudit;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const LookupError& e) {
    std::cerr << "lookup error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return status;
}
