// debiaskit: command-line front end for the debiasing library.
//
//   debiaskit debias text    --embeddings glove.txt --specs specs --out out.txt
//   debiaskit debias visual  --vectors feats.txt --groups groups.tsv --out out.txt
//   debiaskit eval cluster   --before a.txt --after b.txt --specs specs --json r.json
//   debiaskit export 2d      --embeddings a.txt --out coords.csv
//   debiaskit lexicon valence --vad nrc_vad.tsv --tokens "i love you"
//
// Every command is reproducible from its inputs plus --seed: reruns emit
// byte-identical artifacts, and the resolved configuration is echoed into
// each JSON/CSV output.

#include <CLI11.hpp>

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "debias/bias_spec.hpp"
#include "debias/cluster_eval.hpp"
#include "debias/digest.hpp"
#include "debias/embedding.hpp"
#include "debias/errors.hpp"
#include "debias/report_io.hpp"
#include "debias/sentiment.hpp"
#include "debias/text_debias.hpp"
#include "debias/visual_debias.hpp"

namespace fs = std::filesystem;
using debias::ordered_json;

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw debias::ConfigError("cannot open input file '" + path + "'");
  return in;
}

debias::EmbeddingSet load_set(const std::string& path,
                              const std::string& what = "embeddings") {
  auto in = open_input(path);
  auto loaded = debias::load_embeddings<double>(in);
  if (loaded.duplicates_ignored > 0)
    std::cerr << "warning: " << loaded.duplicates_ignored << " duplicate token(s) in "
              << what << " '" << path << "' ignored (first occurrence kept)\n";
  return std::move(loaded.set);
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

debias::BiasDefinition load_definition(const std::string& specs_dir,
                                       const std::string& kind) {
  const fs::path path = fs::path(specs_dir) / (kind + ".tsv");
  if (!fs::exists(path))
    throw debias::ConfigError("bias spec file '" + path.string() + "' does not exist");
  auto in = open_input(path.string());
  return debias::load_bias_definition(debias::BiasKind(kind), in);
}

constexpr const char* kDefaultOrder = "gender,race,age,religion,lgbtq";

// ---------------------------------------------------------------------------
// debias text

struct TextOptions {
  std::string embeddings;
  std::string specs_dir = "specs";
  std::string order = kDefaultOrder;
  std::string out;
  std::string trace;
  std::uint64_t seed = 42;
  Eigen::Index k_candidates = 20;
  Eigen::Index pool_per_pole = 500;
  int restarts = 10;
  bool skip_equalize = false;
  int precision = 6;
};

int run_debias_text(const TextOptions& opt) {
  const auto kinds = split_csv(opt.order);
  if (kinds.empty()) throw debias::ConfigError("--order resolved to no bias kinds");

  std::vector<debias::BiasDefinition> defs;
  for (const auto& kind : kinds) defs.push_back(load_definition(opt.specs_dir, kind));

  const auto set = load_set(opt.embeddings);

  debias::DoubleHardParams params;
  params.k_candidates = opt.k_candidates;
  params.n_per_pole = opt.pool_per_pole;
  params.kmeans_seed = opt.seed;
  params.kmeans_restarts = opt.restarts;
  params.skip_equalize = opt.skip_equalize;

  auto result = debias::multi_debias(set, defs, params);

  ordered_json config{{"command", "debias text"},
                      {"embeddings", opt.embeddings},
                      {"specs", opt.specs_dir},
                      {"order", kinds},
                      {"seed", opt.seed},
                      {"k_candidates", opt.k_candidates},
                      {"pool_per_pole", opt.pool_per_pole},
                      {"restarts", opt.restarts},
                      {"skip_equalize", opt.skip_equalize},
                      {"precision", opt.precision},
                      {"out", opt.out},
                      {"trace", opt.trace}};

  debias::atomic_write_file(opt.out, [&](std::ostream& sink) {
    debias::save_embeddings(result.set, sink, opt.precision);
  });
  if (!opt.trace.empty()) {
    ordered_json stages = ordered_json::array();
    for (const auto& t : result.traces) stages.push_back(debias::trace_json(t));
    const ordered_json doc{{"config", config}, {"stages", stages}};
    debias::atomic_write_file(opt.trace, doc.dump(2) + "\n");
  }
  std::cerr << "debiased " << result.set.size() << " vectors across " << kinds.size()
            << " bias kind(s) -> " << opt.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// debias visual

struct VisualOptions {
  std::string vectors;
  std::string groups;
  std::string method = "both";
  std::string out;
  std::string trace;
  int precision = 6;
};

struct LoadedGroups {
  std::vector<std::string> labels;
  std::vector<debias::RowMatrix<double>> matrices;
};

LoadedGroups load_groups(const std::string& manifest_path) {
  auto in = open_input(manifest_path);
  const auto specs = debias::load_group_manifest(in);
  const fs::path base = fs::path(manifest_path).parent_path();

  LoadedGroups out;
  for (const auto& g : specs) {
    fs::path p(g.path);
    if (p.is_relative()) p = base / p;
    out.labels.push_back(g.label);
    out.matrices.push_back(load_set(p.string(), "group '" + g.label + "'").matrix());
  }
  return out;
}

debias::QuadGroups quads_from(const LoadedGroups& groups) {
  std::map<std::string, const debias::RowMatrix<double>*> by_label;
  for (std::size_t i = 0; i < groups.labels.size(); ++i)
    by_label[groups.labels[i]] = &groups.matrices[i];
  for (const char* label : {"female", "male", "young", "old"})
    if (!by_label.count(label))
      throw debias::ConfigError(std::string("projection debias needs group '") + label +
                                "' in the manifest");
  if (by_label.size() != 4)
    throw debias::ConfigError(
        "projection debias expects exactly the groups female, male, young, old");
  return debias::QuadGroups{*by_label["female"], *by_label["male"], *by_label["young"],
                            *by_label["old"]};
}

int run_debias_visual(const VisualOptions& opt) {
  if (opt.method != "both" && opt.method != "hard" && opt.method != "projection")
    throw debias::ConfigError("--method must be hard, projection, or both");

  const auto vectors = load_set(opt.vectors, "visual vectors");
  const auto groups = load_groups(opt.groups);

  ordered_json stages = ordered_json::array();
  std::optional<debias::EmbeddingSet> current(vectors);

  if (opt.method == "hard" || opt.method == "both") {
    debias::PairGroups pairs;
    pairs.groups = groups.matrices;
    const auto direction = debias::visual_bias_direction(pairs);
    current.emplace(debias::visual_hard_debias(*current, direction));
    stages.push_back(ordered_json{{"stage", "hard"},
                                  {"groups", groups.labels},
                                  {"snapshot", debias::hex_digest(snapshot_hash(*current))}});
  }
  if (opt.method == "projection" || opt.method == "both") {
    const auto quads = quads_from(groups);
    current.emplace(debias::projection_debias(*current, quads));
    stages.push_back(ordered_json{{"stage", "projection"},
                                  {"groups", {"female", "male", "young", "old"}},
                                  {"snapshot", debias::hex_digest(snapshot_hash(*current))}});
  }

  ordered_json config{{"command", "debias visual"}, {"vectors", opt.vectors},
                      {"groups", opt.groups},       {"method", opt.method},
                      {"precision", opt.precision}, {"out", opt.out},
                      {"trace", opt.trace}};

  debias::atomic_write_file(opt.out, [&](std::ostream& sink) {
    debias::save_embeddings(*current, sink, opt.precision);
  });
  if (!opt.trace.empty()) {
    const ordered_json doc{{"config", config},
                           {"input", debias::hex_digest(snapshot_hash(vectors))},
                           {"stages", stages}};
    debias::atomic_write_file(opt.trace, doc.dump(2) + "\n");
  }
  std::cerr << "debiased " << current->size() << " visual vectors (" << opt.method
            << ") -> " << opt.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval cluster

struct EvalOptions {
  std::string before;
  std::string after;
  std::string specs_dir = "specs";
  std::string order = kDefaultOrder;
  std::string tops = "100,500,1000";
  std::uint64_t seed = 42;
  int restarts = 10;
  int max_iters = 300;
  double tol = 1e-4;
  std::string json_out;
  std::string csv_out;
  bool quiet = false;
};

int run_eval(const EvalOptions& opt) {
  const auto kinds = split_csv(opt.order);
  if (kinds.empty()) throw debias::ConfigError("--order resolved to no bias kinds");

  debias::ClusterEvalConfig cfg;
  cfg.tops.clear();
  for (const auto& t : split_csv(opt.tops)) cfg.tops.push_back(std::stoll(t));
  cfg.seed = opt.seed;
  cfg.restarts = opt.restarts;
  cfg.max_iters = opt.max_iters;
  cfg.tol = opt.tol;

  const auto before = load_set(opt.before, "before");
  const auto after = load_set(opt.after, "after");

  std::vector<debias::ClusterReport> reports;
  for (const auto& kind : kinds) {
    const auto def = load_definition(opt.specs_dir, kind);
    reports.push_back(debias::cluster_eval(before, after, def, cfg));
  }

  ordered_json tops = ordered_json::array();
  for (auto n : cfg.tops) tops.push_back(n);
  ordered_json config{{"command", "eval cluster"},
                      {"before", opt.before},
                      {"after", opt.after},
                      {"specs", opt.specs_dir},
                      {"order", kinds},
                      {"tops", tops},
                      {"seed", opt.seed},
                      {"restarts", opt.restarts},
                      {"max_iters", opt.max_iters},
                      {"tol", opt.tol}};

  if (!opt.json_out.empty()) {
    ordered_json body = ordered_json::array();
    for (const auto& r : reports) body.push_back(debias::report_json(r));
    const ordered_json doc{{"config", config}, {"reports", body}};
    debias::atomic_write_file(opt.json_out, doc.dump(2) + "\n");
  }
  if (!opt.csv_out.empty())
    debias::atomic_write_file(opt.csv_out, debias::reports_csv(reports, config.dump()));
  if (!opt.quiet) std::cout << debias::reports_text(reports);
  return 0;
}

// ---------------------------------------------------------------------------
// export 2d

struct ExportOptions {
  std::string embeddings;
  std::string out;
  std::string spec;
  std::string kind;
  Eigen::Index top = 500;
  std::string tokens;
};

int run_export(const ExportOptions& opt) {
  const auto set = load_set(opt.embeddings);

  std::vector<std::string> ids;
  debias::RowMatrix<double> mat;
  if (!opt.spec.empty()) {
    if (opt.top < 2 || opt.top % 2 != 0)
      throw debias::ConfigError("--top must be even and >= 2");
    const std::string kind =
        opt.kind.empty() ? fs::path(opt.spec).stem().string() : opt.kind;
    auto in = open_input(opt.spec);
    const auto def = debias::load_bias_definition(debias::BiasKind(kind), in);
    const auto dir = debias::bias_direction(set, def);
    const auto pools = debias::pole_indices(set, dir.direction, opt.top / 2);
    mat.resize(opt.top, set.dim());
    Eigen::Index r = 0;
    for (const auto* pool : {&pools.positive, &pools.negative})
      for (Eigen::Index idx : *pool) {
        ids.push_back(set.token(idx));
        mat.row(r++) = set.row(idx);
      }
  } else if (!opt.tokens.empty()) {
    std::stringstream ss(opt.tokens);
    std::string tok;
    while (ss >> tok) ids.push_back(tok);
    mat.resize(static_cast<Eigen::Index>(ids.size()), set.dim());
    for (std::size_t i = 0; i < ids.size(); ++i)
      mat.row(static_cast<Eigen::Index>(i)) = set.vector_of(ids[i]).transpose();
  } else {
    ids = set.tokens();
    mat = set.matrix();
  }

  debias::Projection2D proj{std::move(ids), debias::project_2d(mat)};

  ordered_json config{{"command", "export 2d"}, {"embeddings", opt.embeddings},
                      {"spec", opt.spec},       {"kind", opt.kind},
                      {"top", opt.top},         {"tokens", opt.tokens},
                      {"out", opt.out}};
  debias::atomic_write_file(opt.out, debias::projection_csv(proj, config.dump()));
  std::cerr << "exported " << proj.ids.size() << " 2d coordinates -> " << opt.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// lexicon valence

struct LexiconOptions {
  std::string vad;
  std::string tokens;
  std::string out;
};

int run_lexicon(const LexiconOptions& opt) {
  auto in = open_input(opt.vad);
  const auto lex = debias::load_vad(in);

  std::vector<std::string> tokens;
  std::stringstream ss(opt.tokens);
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);

  const auto values = debias::valence_sequence(tokens, lex);
  std::string body;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    body += tokens[i] + "\t" + debias::detail::format_fixed(values[i], 3) + "\n";

  if (opt.out.empty()) {
    std::cout << body;
  } else {
    debias::atomic_write_file(opt.out, body);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-bias mitigation toolkit for word embeddings and visual features"};
  app.require_subcommand(1);

  TextOptions text_opt;
  VisualOptions visual_opt;
  EvalOptions eval_opt;
  ExportOptions export_opt;
  LexiconOptions lexicon_opt;
  int rc = 0;

  auto* debias_cmd = app.add_subcommand("debias", "Remove bias from vector sets");
  debias_cmd->require_subcommand(1);

  auto* text = debias_cmd->add_subcommand(
      "text", "Sequential Double-Hard Debias over word embeddings");
  text->add_option("--embeddings", text_opt.embeddings, "embedding text file")->required();
  text->add_option("--specs", text_opt.specs_dir, "directory with <kind>.tsv pair files");
  text->add_option("--order", text_opt.order, "comma-separated bias kinds, applied in order");
  text->add_option("--out", text_opt.out, "debiased embeddings output")->required();
  text->add_option("--trace", text_opt.trace, "debias trace JSON output");
  text->add_option("--seed", text_opt.seed, "top-level seed (fans out to k-means restarts)");
  text->add_option("--k-candidates", text_opt.k_candidates, "candidate frequency directions");
  text->add_option("--pool-per-pole", text_opt.pool_per_pole, "top-biased pool size per pole");
  text->add_option("--restarts", text_opt.restarts, "k-means restarts");
  text->add_flag("--skip-equalize", text_opt.skip_equalize, "skip the equalize step");
  text->add_option("--precision", text_opt.precision, "output decimal digits");
  text->callback([&] { rc = run_debias_text(text_opt); });

  auto* visual = debias_cmd->add_subcommand(
      "visual", "Visual Hard Debias / Projection Debias over feature vectors");
  visual->add_option("--vectors", visual_opt.vectors, "visual feature text file")->required();
  visual->add_option("--groups", visual_opt.groups, "group manifest (label<TAB>path)")->required();
  visual->add_option("--method", visual_opt.method, "hard | projection | both");
  visual->add_option("--out", visual_opt.out, "debiased vectors output")->required();
  visual->add_option("--trace", visual_opt.trace, "trace JSON output");
  visual->add_option("--precision", visual_opt.precision, "output decimal digits");
  visual->callback([&] { rc = run_debias_visual(visual_opt); });

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate debiasing quality");
  eval_cmd->require_subcommand(1);
  auto* cluster = eval_cmd->add_subcommand(
      "cluster", "Top-N two-cluster alignment accuracy, before vs after");
  cluster->add_option("--before", eval_opt.before, "original vectors")->required();
  cluster->add_option("--after", eval_opt.after, "debiased vectors")->required();
  cluster->add_option("--specs", eval_opt.specs_dir, "directory with <kind>.tsv pair files");
  cluster->add_option("--order", eval_opt.order, "comma-separated bias kinds");
  cluster->add_option("--tops", eval_opt.tops, "comma-separated top-N values");
  cluster->add_option("--seed", eval_opt.seed, "k-means seed");
  cluster->add_option("--restarts", eval_opt.restarts, "k-means restarts");
  cluster->add_option("--max-iters", eval_opt.max_iters, "k-means iteration cap");
  cluster->add_option("--tol", eval_opt.tol, "k-means convergence threshold");
  cluster->add_option("--json", eval_opt.json_out, "report JSON output");
  cluster->add_option("--csv", eval_opt.csv_out, "report CSV output");
  cluster->add_flag("--quiet", eval_opt.quiet, "suppress the stdout table");
  cluster->callback([&] { rc = run_eval(eval_opt); });

  auto* export_cmd = app.add_subcommand("export", "Export derived artifacts");
  export_cmd->require_subcommand(1);
  auto* twod = export_cmd->add_subcommand(
      "2d", "PCA projection of vectors to 2D coordinates (CSV id,x,y)");
  twod->add_option("--embeddings", export_opt.embeddings, "vector text file")->required();
  twod->add_option("--out", export_opt.out, "coordinates CSV output")->required();
  twod->add_option("--spec", export_opt.spec, "bias pair file: export only top biased tokens");
  twod->add_option("--kind", export_opt.kind, "bias kind name (default: spec file stem)");
  twod->add_option("--top", export_opt.top, "how many top biased tokens to export");
  twod->add_option("--tokens", export_opt.tokens, "space-separated explicit token list");
  twod->callback([&] { rc = run_export(export_opt); });

  auto* lexicon_cmd = app.add_subcommand("lexicon", "Sentiment lexicon utilities");
  lexicon_cmd->require_subcommand(1);
  auto* valence = lexicon_cmd->add_subcommand(
      "valence", "Valence scores for tokens (0.5 for out-of-vocabulary)");
  valence->add_option("--vad", lexicon_opt.vad, "NRC-VAD TSV file")->required();
  valence->add_option("--tokens", lexicon_opt.tokens, "space-separated tokens")->required();
  valence->add_option("--out", lexicon_opt.out, "output file (default stdout)");
  valence->callback([&] { rc = run_lexicon(lexicon_opt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const debias::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
