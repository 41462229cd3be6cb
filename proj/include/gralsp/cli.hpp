#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gralsp/eval.hpp"
#include "gralsp/graph.hpp"
#include "gralsp/io.hpp"
#include "gralsp/model.hpp"
#include "gralsp/trainer.hpp"
#include "gralsp/walks.hpp"

namespace gralsp::cli {

namespace fs = std::filesystem;

class CliError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError("cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw CliError("cannot write '" + path.string() + "'");
  return out;
}

struct GraphInputs {
  std::string edges, features, labels;

  void add_to(CLI::App* app, bool required = true) {
    auto* e = app->add_option("--edges", edges, "edge list: two node ids per line");
    if (required) e->required();
    app->add_option("--features", features, "feature rows: '<id> f1 ... fF'; identity features when omitted");
    app->add_option("--labels", labels, "label rows: '<id> <class>'");
  }

  Graph load() const {
    std::ifstream e = open_in(edges);
    std::optional<std::ifstream> f, l;
    if (!features.empty()) f = open_in(features);
    if (!labels.empty()) l = open_in(labels);
    return load_graph(e, f ? &*f : nullptr, l ? &*l : nullptr);
  }
};

inline void add_common(CLI::App* app, std::uint64_t& seed, std::size_t& threads) {
  app->add_option("--seed", seed, "random seed")->capture_default_str();
  app->add_option("--threads", threads, "worker threads; 0 uses all cores, 1 is the strictest determinism mode")
      ->capture_default_str();
}

inline void add_config(CLI::App* app) {
  app->add_option("--config", "file of 'key = value' lines; command-line flags take precedence")
      ->configurable(false);
}

/// Splices the subcommand's --config file in as leading "--key=value"
/// arguments, so flags given on the command line win. Returns CLI11's
/// reversed argument order.
inline std::vector<std::string> expand_config(int argc, const char* const* argv, const CLI::App& app) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::size_t sub_at = args.size();
  const CLI::App* sub = nullptr;
  for (std::size_t i = 0; i < args.size() && !sub; ++i) {
    for (const CLI::App* s : app.get_subcommands([](const CLI::App*) { return true; })) {
      if (s->check_name(args[i])) {
        sub = s;
        sub_at = i;
        break;
      }
    }
  }
  std::string path;
  for (std::size_t i = sub_at + 1; sub && i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  std::vector<std::string> spliced;
  if (!path.empty()) {
    if (!fs::exists(path)) throw CliError("cannot open config '" + path + "'");
    for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
      if (item.inputs.empty() || item.name == "++" || item.name == "--") continue;
      if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "default")) {
        throw CliError("config '" + path + "': sections are not supported ('" + item.fullname() + "')");
      }
      std::string value = item.inputs.front();
      for (std::size_t k = 1; k < item.inputs.size(); ++k) value += "," + item.inputs[k];
      if (value.empty()) continue;
      const CLI::Option* positional = sub->get_option_no_throw(item.name);
      if (positional && positional->get_positional()) {
        spliced.push_back(value);
      } else {
        spliced.push_back("--" + item.name + "=" + value);
      }
    }
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(std::min(sub_at + 1, args.size())), spliced.begin(),
              spliced.end());
  std::reverse(args.begin(), args.end());
  return args;
}

inline void add_walk_options(CLI::App* app, TrainConfig& cfg) {
  app->add_option("--gamma", cfg.walks_per_node, "walks per node")->capture_default_str();
  app->add_option("--l", cfg.walk_length, "walk length in nodes")->capture_default_str();
}

inline void add_train_options(CLI::App* app, TrainConfig& cfg) {
  add_walk_options(app, cfg);
  app->add_option("--window", cfg.window, "skip-gram window")->capture_default_str();
  app->add_option("--negatives", cfg.negatives, "negative samples per pair")->capture_default_str();
  app->add_option("--s", cfg.walks_per_layer, "walks sampled per node per layer")->capture_default_str();
  app->add_option("--mu", cfg.walk_loss_weight, "weight of the walk proximity objective")->capture_default_str();
  app->add_option("--pattern_dim", cfg.pattern_dim, "walk embedding dimension")->capture_default_str();
  app->add_option("--hidden_dim", cfg.hidden_dim, "hidden layer width")->capture_default_str();
  app->add_option("--output_dim", cfg.output_dim, "embedding dimension")->capture_default_str();
  app->add_option("--layers", cfg.num_layers, "aggregation layers")->capture_default_str();
  app->add_option("--lr", cfg.learning_rate, "Adam learning rate")->capture_default_str();
  app->add_option("--batch_size", cfg.batch_size, "context pairs per iteration")->capture_default_str();
  app->add_option("--triples_per_node", cfg.triples_per_node, "walk triples drawn per node per epoch")
      ->capture_default_str();
  app->add_option("--max_iters", cfg.max_iters, "iteration cap")->capture_default_str();
  app->add_option("--patience", cfg.patience, "iterations without a new best moving average before stopping")
      ->capture_default_str();
  app->add_option("--smoothing", cfg.smoothing, "moving-average window of the stopping rule")->capture_default_str();
  app->add_option("--inference_samples", cfg.inference_samples, "neighborhood draws averaged per final embedding")
      ->capture_default_str();
  app->add_option("--attention", cfg.attention, "walk attention (true/false)")->capture_default_str();
  app->add_option("--amplification", cfg.amplification, "channel gates (true/false)")->capture_default_str();
  app->add_option("--adaptive_radius", cfg.adaptive_radius, "per-walk receptive radius (true/false)")
      ->capture_default_str();
  app->add_option("--relu_output", cfg.relu_output, "ReLU on the output layer (true/false)")->capture_default_str();
  app->add_option("--normalize_output", cfg.normalize_output, "unit-norm embeddings (true/false)")
      ->capture_default_str();
}

inline fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw CliError("cannot create '" + dir + "': " + ec.message());
  return p;
}

/// Every run leaves its resolved options next to its outputs.
inline void write_resolved_config(const CLI::App* app, const fs::path& dir) {
  auto out = open_out(dir / "config.ini");
  out << app->config_to_str(true, false);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

/// Runs the command line; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"GraLSP: graph neural network with local structural patterns"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.name("gralsp");

  // synth
  std::string synth_kind, synth_dir;
  std::size_t synth_n = 100, synth_noise = 0;
  double synth_np = 6.0, synth_p = -1.0;
  std::uint64_t synth_seed = 1;
  std::size_t synth_threads = 0;
  auto* synth = app.add_subcommand("synth", "generate a synthetic graph");
  synth->add_option("kind", synth_kind, "er | triad-circle")->required()->check(CLI::IsMember({"er", "triad-circle"}));
  synth->add_option("--n", synth_n, "circle length (triad-circle) or node count (er)")->capture_default_str();
  synth->add_option("--np", synth_np, "expected degree of er graphs, p = np / n")->capture_default_str();
  synth->add_option("--p", synth_p, "explicit er edge probability; overrides --np");
  synth->add_option("--noise_dim", synth_noise, "uniform noise features for er; 0 leaves identity features implicit")
      ->capture_default_str();
  synth->add_option("-o,--out", synth_dir, "output directory")->required()->configurable(false);
  add_common(synth, synth_seed, synth_threads);
  add_config(synth);

  // walks
  GraphInputs walks_in;
  TrainConfig walks_cfg;
  std::string walks_dir;
  bool walks_dump = false;
  auto* walks = app.add_subcommand("walks", "sample anonymous walks and write pattern distributions");
  walks_in.add_to(walks);
  add_walk_options(walks, walks_cfg);
  walks->add_flag("--dump_corpus", walks_dump, "also write every walk with its pattern");
  walks->add_option("-o,--out", walks_dir, "output directory")->required()->configurable(false);
  add_common(walks, walks_cfg.seed, walks_cfg.threads);
  add_config(walks);

  // train
  GraphInputs train_in;
  TrainConfig train_cfg;
  std::string train_dir;
  auto* train_cmd = app.add_subcommand("train", "train GraLSP and write embeddings");
  train_in.add_to(train_cmd);
  add_train_options(train_cmd, train_cfg);
  train_cmd->add_option("-o,--out", train_dir, "output directory")->required()->configurable(false);
  add_common(train_cmd, train_cfg.seed, train_cfg.threads);
  add_config(train_cmd);

  // eval-classify
  std::string ec_emb, ec_labels, ec_dir;
  ClassifyOptions ec_opt;
  auto* ec = app.add_subcommand("eval-classify", "node classification with softmax regression");
  ec->add_option("--embeddings", ec_emb, "embedding file")->required();
  ec->add_option("--labels", ec_labels, "label rows: '<id> <class>'")->required();
  ec->add_option("--test_frac", ec_opt.test_frac, "held-out fraction per class")->capture_default_str();
  ec->add_option("--repeats", ec_opt.repeats, "independent splits")->capture_default_str();
  ec->add_option("-o,--out", ec_dir, "optional output directory for report.csv")->configurable(false);
  add_common(ec, ec_opt.seed, ec_opt.threads);
  add_config(ec);

  // eval-linkpred
  GraphInputs lp_in;
  TrainConfig lp_cfg;
  double lp_frac = 0.1;
  std::string lp_dir;
  auto* lp = app.add_subcommand("eval-linkpred", "hold out edges, retrain, and score them");
  lp_in.add_to(lp);
  add_train_options(lp, lp_cfg);
  lp->add_option("--frac", lp_frac, "fraction of edges held out")->capture_default_str();
  lp->add_option("-o,--out", lp_dir, "optional output directory for report.csv")->configurable(false);
  add_common(lp, lp_cfg.seed, lp_cfg.threads);
  add_config(lp);

  // project
  std::string pj_emb, pj_labels, pj_dir;
  std::uint64_t pj_seed = 1;
  std::size_t pj_threads = 0;
  auto* pj = app.add_subcommand("project", "2-D PCA projection of embeddings");
  pj->add_option("--embeddings", pj_emb, "embedding file")->required();
  pj->add_option("--labels", pj_labels, "optional label rows: '<id> <class>'");
  pj->add_option("-o,--out", pj_dir, "output directory")->required()->configurable(false);
  add_common(pj, pj_seed, pj_threads);
  add_config(pj);

  // gradcheck
  GradientGateOptions gc_opt;
  double gc_tol = 1e-4;
  std::uint64_t gc_seed = 1;
  std::size_t gc_threads = 0;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the full objective");
  gc->add_option("--n", gc_opt.nodes, "ER graph size")->capture_default_str();
  gc->add_option("--p", gc_opt.edge_prob, "ER edge probability")->capture_default_str();
  gc->add_option("--eps", gc_opt.eps, "central-difference step")->capture_default_str();
  gc->add_option("--tol", gc_tol, "maximum accepted relative error")->capture_default_str();
  gc->add_option("--pattern_dim", gc_opt.pattern_dim, "walk embedding dimension")->capture_default_str();
  gc->add_option("--hidden_dim", gc_opt.hidden_dim, "hidden layer width")->capture_default_str();
  gc->add_option("--output_dim", gc_opt.output_dim, "embedding dimension")->capture_default_str();
  add_common(gc, gc_seed, gc_threads);
  add_config(gc);

  // bench-scaling
  TrainConfig bs_cfg;
  std::string bs_sizes = "100,1000,10000", bs_dir;
  bool bs_large = false;
  double bs_np = 6.0;
  std::size_t bs_noise = 16, bs_repeats = 3;
  bs_cfg.max_iters = 20;
  bs_cfg.inference_samples = 1;
  auto* bs = app.add_subcommand("bench-scaling", "time preprocessing and training on ER graphs of growing size");
  bs->add_option("--sizes", bs_sizes, "comma-separated node counts")->capture_default_str();
  bs->add_flag("--include_1e5", bs_large, "append n = 100000");
  bs->add_option("--np", bs_np, "expected degree")->capture_default_str();
  bs->add_option("--noise_dim", bs_noise, "noise feature dimension")->capture_default_str();
  bs->add_option("--repeats", bs_repeats, "preprocessing timings per size; the minimum is kept")->capture_default_str();
  add_train_options(bs, bs_cfg);
  bs->add_option("-o,--out", bs_dir, "output directory")->required()->configurable(false);
  add_common(bs, bs_cfg.seed, bs_cfg.threads);
  add_config(bs);

  for (std::size_t* t : {&walks_cfg.threads, &train_cfg.threads, &lp_cfg.threads, &bs_cfg.threads, &ec_opt.threads})
    *t = 0;

  try {
    std::vector<std::string> args = expand_config(argc, argv, app);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (synth->parsed()) {
      Graph g;
      if (synth_kind == "er") {
        const double p = synth_p >= 0.0 ? synth_p : synth_np / static_cast<double>(synth_n);
        g = generate_er(synth_n, p, synth_seed, synth_noise);
      } else {
        g = generate_triad_circle(synth_n);
      }
      fs::path dir = prepare_dir(synth_dir);
      {
        auto f = open_out(dir / "edges.txt");
        write_edge_list(g, f);
      }
      if (synth_kind == "triad-circle" || synth_noise > 0) {
        auto f = open_out(dir / "features.txt");
        write_features(g, f);
      }
      if (g.has_labels()) {
        auto f = open_out(dir / "labels.txt");
        write_labels(g, f);
      }
      write_resolved_config(synth, dir);
      DegreeStats st = degree_stats(g);
      out << "nodes " << g.num_nodes() << " edges " << g.num_edges() << " avg_degree " << st.avg_degree
          << " clustering " << st.clustering_coefficient << "\n";
      return 0;
    }

    if (walks->parsed()) {
      Graph g = walks_in.load();
      walks_cfg.validate();
      WalkCorpus corpus = build_corpus(g, walks_cfg);
      fs::path dir = prepare_dir(walks_dir);
      {
        auto f = open_out(dir / "distributions.csv");
        write_node_distributions(corpus, g, f);
      }
      {
        auto f = open_out(dir / "graph_distribution.csv");
        write_graph_distribution(corpus, f);
      }
      if (walks_dump) {
        auto f = open_out(dir / "corpus.txt");
        write_corpus(corpus, g, f);
      }
      write_resolved_config(walks, dir);
      out << "walks " << corpus.num_walks() << " patterns " << corpus.registry().size() << "\n";
      return 0;
    }

    if (train_cmd->parsed()) {
      Graph g = train_in.load();
      TrainResult r = fit_embeddings(g, train_cfg);
      fs::path dir = prepare_dir(train_dir);
      {
        auto f = open_out(dir / "embeddings.txt");
        write_embeddings(g.names(), r.embeddings, f);
      }
      {
        auto f = open_out(dir / "loss.csv");
        write_loss_csv(r.history, f);
      }
      {
        auto f = open_out(dir / "checkpoint.txt");
        save_checkpoint(r.params, f);
      }
      write_resolved_config(train_cmd, dir);
      const LossRecord& last = r.history.back();
      out << "iterations " << r.history.size() << (r.converged ? " converged" : " stopped at max_iters")
          << " node_loss " << last.node_loss << " walk_loss " << last.walk_loss << " total " << last.total << "\n";
      return 0;
    }

    if (ec->parsed()) {
      std::ifstream ef = open_in(ec_emb);
      NamedEmbeddings e = read_embeddings(ef, ec_emb);
      std::ifstream lf = open_in(ec_labels);
      auto lines = read_label_lines(lf, ec_labels);
      std::map<std::string, int> classes;
      for (const auto& [id, c] : lines) classes.emplace(c, 0);
      int next = 0;
      for (auto& [c, k] : classes) k = next++;
      std::map<std::string, std::size_t> row;
      for (std::size_t i = 0; i < e.names.size(); ++i) row.emplace(e.names[i], i);
      std::vector<int> labels(e.names.size(), kUnlabeled);
      for (const auto& [id, c] : lines) {
        auto it = row.find(id);
        if (it == row.end()) throw CliError("label for node '" + id + "' which has no embedding");
        labels[it->second] = classes.at(c);
      }
      EvalReport rep = classify(e.values, labels, ec_opt);
      write_report_table(rep, out);
      if (!ec_dir.empty()) {
        fs::path dir = prepare_dir(ec_dir);
        auto f = open_out(dir / "report.csv");
        write_report_csv(rep, f);
        write_resolved_config(ec, dir);
      }
      return 0;
    }

    if (lp->parsed()) {
      Graph g = lp_in.load();
      EmbedFn fn = [&](const Graph& reduced) { return fit_embeddings(reduced, lp_cfg).embeddings; };
      EvalReport rep = link_prediction_eval(g, fn, lp_frac, lp_cfg.seed);
      write_report_table(rep, out);
      if (!lp_dir.empty()) {
        fs::path dir = prepare_dir(lp_dir);
        auto f = open_out(dir / "report.csv");
        write_report_csv(rep, f);
        write_resolved_config(lp, dir);
      }
      return 0;
    }

    if (pj->parsed()) {
      std::ifstream ef = open_in(pj_emb);
      NamedEmbeddings e = read_embeddings(ef, pj_emb);
      std::map<std::string, std::string> label_of;
      if (!pj_labels.empty()) {
        std::ifstream lf = open_in(pj_labels);
        for (auto& [id, c] : read_label_lines(lf, pj_labels)) label_of[id] = c;
      }
      Matrix xy = pca_2d(e.values);
      fs::path dir = prepare_dir(pj_dir);
      auto f = open_out(dir / "pca.csv");
      f.precision(std::numeric_limits<double>::max_digits10);
      f << "node_id,x,y,label\n";
      for (std::size_t i = 0; i < e.names.size(); ++i) {
        auto it = label_of.find(e.names[i]);
        f << e.names[i] << ',' << xy(i, 0) << ',' << xy(i, 1) << ',' << (it == label_of.end() ? "" : it->second)
          << "\n";
      }
      write_resolved_config(pj, dir);
      return 0;
    }

    if (gc->parsed()) {
      GradientGateReport r = gradient_gate(gc_seed, gc_opt);
      for (const auto& [name, e] : r.groups) out << name << ' ' << e << "\n";
      out << "max_relative_error " << r.max_relative_error << " coordinates " << r.coordinates << "\n";
      return r.max_relative_error < gc_tol ? 0 : 1;
    }

    if (bs->parsed()) {
      std::vector<std::size_t> sizes;
      for (const auto& s : split_list(bs_sizes)) sizes.push_back(static_cast<std::size_t>(std::stoull(s)));
      if (bs_large) sizes.push_back(100000);
      if (sizes.size() < 2) throw CliError("bench-scaling needs at least two sizes");
      fs::path dir = prepare_dir(bs_dir);
      auto f = open_out(dir / "bench.csv");
      f << "n,edges,preprocess_seconds,train_seconds,iterations\n";
      std::vector<double> ns, pre, tr;
      bench_scaling(sizes, bs_np, bs_noise, bs_repeats, bs_cfg, [&](const BenchRow& row) {
        f << row.n << ',' << row.edges << ',' << row.preprocess_seconds << ',' << row.train_seconds << ','
          << row.iterations << "\n";
        out << "n " << row.n << " preprocess " << row.preprocess_seconds << "s train " << row.train_seconds
            << "s iterations " << row.iterations << std::endl;
        ns.push_back(static_cast<double>(row.n));
        pre.push_back(row.preprocess_seconds);
        tr.push_back(row.train_seconds);
      });
      out << "loglog_slope preprocess " << loglog_slope(ns, pre) << " train " << loglog_slope(ns, tr) << "\n";
      write_resolved_config(bs, dir);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace gralsp::cli
