// nwsil: scoring, nested distances, text metrics and toy training from the
// command line. Links only the C API in libnwsil.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nwsil/nwsil.h"

namespace {

using json = nlohmann::ordered_json;

enum class Format { kJson, kTable, kCsv };

// Carries the process exit code: 2 for input problems, 1 for internal ones.
struct CliError {
  int exit_code;
  std::string message;
};

[[noreturn]] void input_error(const std::string& msg) { throw CliError{2, msg}; }

void check(nwsil_status st, const std::string& context) {
  if (st == NWSIL_OK) return;
  std::string msg = context + ": " + nwsil_last_error();
  throw CliError{st == NWSIL_E_INTERNAL ? 1 : 2, msg};
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) input_error("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<const char*> c_strs(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string take_string(char* s) {
  std::string out(s ? s : "");
  nwsil_string_free(s);
  return out;
}

struct EmbeddingsDeleter {
  void operator()(nwsil_embeddings* p) const { nwsil_embeddings_free(p); }
};
struct ManifestDeleter {
  void operator()(nwsil_manifest* p) const { nwsil_manifest_free(p); }
};
using EmbeddingsPtr = std::unique_ptr<nwsil_embeddings, EmbeddingsDeleter>;
using ManifestPtr = std::unique_ptr<nwsil_manifest, ManifestDeleter>;

struct Common {
  std::string embeddings;
  double gamma = 0.0;
  int outer_iters = 0;
  std::uint64_t seed = 0;
  std::string oov = "strict";
  bool lowercase = false;
  bool table = false;
  bool csv = false;
  std::string out;

  nwsil_ipot_config ipot() const {
    nwsil_ipot_config c;
    nwsil_ipot_config_default(&c);
    if (gamma > 0.0) c.gamma = gamma;
    if (outer_iters > 0) c.outer_iters = outer_iters;
    return c;
  }

  Format format() const {
    if (csv) return Format::kCsv;
    return table ? Format::kTable : Format::kJson;
  }

  EmbeddingsPtr load_embeddings() const {
    nwsil_embeddings* e = nullptr;
    check(nwsil_embeddings_load(embeddings.c_str(),
                                oov == "hash" ? NWSIL_OOV_HASH : NWSIL_OOV_STRICT,
                                &e),
          "embeddings '" + embeddings + "'");
    return EmbeddingsPtr(e);
  }

  ManifestPtr manifest(const char* command) const {
    ManifestPtr m(nwsil_manifest_new(command, seed));
    if (!m) throw CliError{1, "out of memory"};
    nwsil_manifest_set(m.get(), "lowercase", lowercase ? "true" : "false");
    if (!embeddings.empty()) {
      const auto c = ipot();
      nwsil_manifest_set(m.get(), "oov", oov.c_str());
      nwsil_manifest_set(m.get(), "ipot.gamma", fmt_double(c.gamma).c_str());
      nwsil_manifest_set(m.get(), "ipot.outer_iters",
                         std::to_string(c.outer_iters).c_str());
      nwsil_manifest_set(m.get(), "ipot.inner_iters",
                         std::to_string(c.inner_iters).c_str());
      add_input(m.get(), embeddings);
    }
    return m;
  }

  static void add_input(nwsil_manifest* m, const std::string& path) {
    check(nwsil_manifest_add_input(m, path.c_str()), "hashing '" + path + "'");
  }

  void emit(const std::string& text) const {
    if (out.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) input_error("cannot write '" + out + "'");
    f << text;
  }
};

json manifest_json(const nwsil_manifest* m) {
  char* s = nullptr;
  check(nwsil_manifest_json(m, &s), "manifest");
  return json::parse(take_string(s));
}

void add_common(CLI::App* cmd, Common& c, bool embeddings_required) {
  auto* e = cmd->add_option("--embeddings", c.embeddings,
                            "embedding file: header 'V d', then 'token x_1 .. x_d'");
  if (embeddings_required) e->required();
  cmd->add_option("--gamma", c.gamma, "IPOT proximal step (default 0.1)");
  cmd->add_option("--outer-iters", c.outer_iters,
                  "IPOT outer iteration cap (default 1000)");
  cmd->add_option("--seed", c.seed, "seed for subsampling")->capture_default_str();
  cmd->add_option("--oov", c.oov, "out-of-vocabulary policy")
      ->check(CLI::IsMember({"strict", "hash"}))
      ->capture_default_str();
  cmd->add_flag("--lowercase", c.lowercase, "lowercase tokens before lookup");
  auto* j = cmd->add_flag("--json", "JSON output (default)");
  auto* t = cmd->add_flag("--table", c.table, "human-readable table");
  t->excludes(j);
  cmd->add_option("--out", c.out, "write output here instead of stdout");
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
  std::string hyp;
  std::string ref;
  bool corpus = false;
};

int run_score(const Common& c, const ScoreArgs& a) {
  const auto hyps = read_lines(a.hyp);
  const auto refs = read_lines(a.ref);
  if (hyps.empty()) input_error("'" + a.hyp + "' has no lines");
  if (refs.empty()) input_error("'" + a.ref + "' has no lines");
  if (!a.corpus && hyps.size() != refs.size()) {
    input_error("line counts differ: " + std::to_string(hyps.size()) + " in '" +
                a.hyp + "', " + std::to_string(refs.size()) + " in '" + a.ref +
                "' (use --corpus for a shared reference set)");
  }
  auto table = c.load_embeddings();
  const auto ipot = c.ipot();

  auto score = [&](std::size_t i, std::size_t j, double& d, double& r) {
    check(nwsil_seq_wasserstein(table.get(), hyps[i].c_str(), refs[j].c_str(),
                                c.lowercase, &ipot, &d, &r),
          a.corpus ? "'" + a.hyp + "' line " + std::to_string(i + 1) +
                         " vs '" + a.ref + "' line " + std::to_string(j + 1)
                   : "line " + std::to_string(i + 1));
  };

  json pairs = json::array();
  double sum_d = 0.0, sum_r = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    double d = 0.0, r = 0.0;
    std::size_t best = i;
    if (a.corpus) {
      // best-matching reference
      r = -1.0;
      for (std::size_t j = 0; j < refs.size(); ++j) {
        double dj = 0.0, rj = 0.0;
        score(i, j, dj, rj);
        if (rj > r) {
          r = rj;
          d = dj;
          best = j;
        }
      }
    } else {
      score(i, i, d, r);
    }
    json p = {{"index", i}, {"w_distance", d}, {"w_reward", r}};
    if (a.corpus) p["ref_index"] = best;
    pairs.push_back(p);
    sum_d += d;
    sum_r += r;
  }
  const double n = static_cast<double>(hyps.size());

  auto m = c.manifest("score");
  nwsil_manifest_set(m.get(), "mode", a.corpus ? "corpus" : "pairwise");
  Common::add_input(m.get(), a.hyp);
  Common::add_input(m.get(), a.ref);

  std::ostringstream os;
  if (c.format() == Format::kJson) {
    json j;
    j["command"] = "score";
    j["mode"] = a.corpus ? "corpus" : "pairwise";
    j["pairs"] = pairs;
    j["mean_w_distance"] = sum_d / n;
    j["mean_w_reward"] = sum_r / n;
    j["manifest"] = manifest_json(m.get());
    os << j.dump(2) << "\n";
  } else {
    os << "index  w_distance  w_reward\n";
    for (const auto& p : pairs) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%5zu  %10.6f  %8.6f\n",
                    p["index"].get<std::size_t>(), p["w_distance"].get<double>(),
                    p["w_reward"].get<double>());
      os << buf;
    }
    os << "mean   " << fmt_double(sum_d / n) << "    " << fmt_double(sum_r / n)
       << "\n";
  }
  c.emit(os.str());
  return 0;
}

// ---------------------------------------------------------------- nested

struct NestedArgs {
  std::string a;
  std::string b;
  int k = 5;
  int k_prime = 5;
};

std::vector<std::size_t> pick(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(std::min(n, k));
  if (n <= k) {
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  check(nwsil_subsample_indices(n, k, seed, idx.data()), "subsample");
  return idx;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (auto x : v) {
    if (!s.empty()) s += ",";
    s += std::to_string(x);
  }
  return s;
}

int run_nested(const Common& c, const NestedArgs& a) {
  if (a.k < 1 || a.k_prime < 1) input_error("--k and --k-prime must be >= 1");
  const auto all_a = read_lines(a.a);
  const auto all_b = read_lines(a.b);
  if (all_a.empty()) input_error("'" + a.a + "' has no lines");
  if (all_b.empty()) input_error("'" + a.b + "' has no lines");
  const auto ia = pick(all_a.size(), static_cast<std::size_t>(a.k), c.seed);
  const auto ib = pick(all_b.size(), static_cast<std::size_t>(a.k_prime),
                       c.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::string> sa, sb;
  for (auto i : ia) sa.push_back(all_a[i]);
  for (auto i : ib) sb.push_back(all_b[i]);

  auto table = c.load_embeddings();
  const auto ipot = c.ipot();
  const auto pa = c_strs(sa);
  const auto pb = c_strs(sb);
  nwsil_nested_result* raw = nullptr;
  check(nwsil_nested(table.get(), pa.data(), pa.size(), pb.data(), pb.size(),
                     c.lowercase, &ipot, &raw),
        "nested");
  std::unique_ptr<nwsil_nested_result, void (*)(nwsil_nested_result*)> res(
      raw, nwsil_nested_free);

  const std::size_t ka = sa.size(), kb = sb.size();
  std::vector<double> plan(ka * kb), costs(ka * kb);
  nwsil_nested_plan(res.get(), plan.data());
  nwsil_nested_seq_costs(res.get(), costs.data());
  std::vector<double> r_raw(ka), r_norm(ka);
  for (std::size_t i = 0; i < ka; ++i) {
    check(nwsil_nested_reward(res.get(), i, NWSIL_SCALE_RAW, &r_raw[i]), "reward");
    check(nwsil_nested_reward(res.get(), i, NWSIL_SCALE_NORMALIZED, &r_norm[i]),
          "reward");
  }
  const double w = nwsil_nested_distance(res.get());

  auto m = c.manifest("nested");
  nwsil_manifest_set(m.get(), "k", std::to_string(a.k).c_str());
  nwsil_manifest_set(m.get(), "k_prime", std::to_string(a.k_prime).c_str());
  nwsil_manifest_set(m.get(), "subsample.a", join(ia).c_str());
  nwsil_manifest_set(m.get(), "subsample.b", join(ib).c_str());
  Common::add_input(m.get(), a.a);
  Common::add_input(m.get(), a.b);

  std::ostringstream os;
  if (c.format() == Format::kJson) {
    json rows = json::array(), crow = json::array();
    for (std::size_t i = 0; i < ka; ++i) {
      rows.push_back(std::vector<double>(plan.begin() + i * kb,
                                         plan.begin() + (i + 1) * kb));
      crow.push_back(std::vector<double>(costs.begin() + i * kb,
                                         costs.begin() + (i + 1) * kb));
    }
    json j;
    j["command"] = "nested";
    j["w_nc"] = w;
    j["indices_a"] = ia;
    j["indices_b"] = ib;
    j["outer_plan"] = {{"rows", ka},
                       {"cols", kb},
                       {"converged", nwsil_nested_converged(res.get()) != 0},
                       {"iterations", nwsil_nested_iterations(res.get())},
                       {"values", rows}};
    j["seq_costs"] = crow;
    j["r_ns"] = r_raw;
    j["r_ns_normalized"] = r_norm;
    j["manifest"] = manifest_json(m.get());
    os << j.dump(2) << "\n";
  } else {
    os << "W_nc " << fmt_double(w) << "\n";
    os << "hyp  r_ns      r_ns_norm\n";
    for (std::size_t i = 0; i < ka; ++i) {
      char buf[80];
      std::snprintf(buf, sizeof buf, "%3zu  %.6f  %.6f\n", ia[i], r_raw[i],
                    r_norm[i]);
      os << buf;
    }
  }
  c.emit(os.str());
  return 0;
}

// ---------------------------------------------------------------- metrics

struct MetricsArgs {
  std::string hyp;
  std::string ref;
  int order = 4;
};

int run_metrics(const Common& c, const MetricsArgs& a) {
  const auto hyps = read_lines(a.hyp);
  const auto refs = read_lines(a.ref);
  const auto ph = c_strs(hyps);
  const auto pr = c_strs(refs);
  nwsil_bleu_report rep{};
  check(nwsil_bleu_report_compute(ph.data(), ph.size(), pr.data(), pr.size(),
                                  a.order, c.lowercase, &rep),
        "metrics");

  auto m = c.manifest("metrics");
  nwsil_manifest_set(m.get(), "order", std::to_string(a.order).c_str());
  Common::add_input(m.get(), a.hyp);
  Common::add_input(m.get(), a.ref);

  std::ostringstream os;
  if (c.format() == Format::kJson) {
    json j;
    j["command"] = "metrics";
    j["order"] = rep.order;
    j["test_bleu"] = rep.test_bleu;
    j["self_bleu"] = rep.self_bleu;
    j["f1_bleu"] = rep.f1_bleu;
    j["manifest"] = manifest_json(m.get());
    os << j.dump(2) << "\n";
  } else {
    os << "order      " << rep.order << "\n"
       << "test_bleu  " << fmt_double(rep.test_bleu) << "\n"
       << "self_bleu  " << fmt_double(rep.self_bleu) << "\n"
       << "f1_bleu    " << fmt_double(rep.f1_bleu) << "\n";
  }
  c.emit(os.str());
  return 0;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  std::vector<std::string> sentences;  // reference, then candidates
  std::string from;
  int order = 2;
};

int run_compare(const Common& c, const CompareArgs& a) {
  std::vector<std::string> s = a.sentences;
  if (!a.from.empty()) {
    if (!s.empty()) input_error("give sentences either inline or with --from");
    for (auto& line : read_lines(a.from)) {
      if (line.find_first_not_of(" \t") != std::string::npos) s.push_back(line);
    }
  }
  if (s.size() < 2) input_error("need a reference and at least one candidate");
  const std::string& ref = s.front();
  const std::vector<std::string> cands(s.begin() + 1, s.end());

  auto table = c.load_embeddings();
  const auto ipot = c.ipot();
  const char* ref_p = ref.c_str();
  struct Row {
    double bleu, naive, w_reward;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const std::string ctx = "candidate " + std::to_string(i + 1);
    Row r{};
    check(nwsil_sentence_bleu(cands[i].c_str(), &ref_p, 1, a.order, c.lowercase,
                              &r.bleu),
          ctx);
    check(nwsil_naive_score(table.get(), cands[i].c_str(), ref_p, c.lowercase,
                            &r.naive),
          ctx);
    check(nwsil_seq_wasserstein(table.get(), cands[i].c_str(), ref_p,
                                c.lowercase, &ipot, nullptr, &r.w_reward),
          ctx);
    rows.push_back(r);
  }
  auto best = [&](double Row::*f) {
    std::size_t b = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].*f > rows[b].*f) b = i;
    }
    return b;
  };

  auto m = c.manifest("compare");
  nwsil_manifest_set(m.get(), "order", std::to_string(a.order).c_str());
  nwsil_manifest_set(m.get(), "reference", ref.c_str());
  if (!a.from.empty()) Common::add_input(m.get(), a.from);

  std::ostringstream os;
  switch (c.format()) {
    case Format::kJson: {
      json jr = json::array();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        jr.push_back({{"index", i},
                      {"candidate", cands[i]},
                      {"bleu", rows[i].bleu},
                      {"naive", rows[i].naive},
                      {"w_reward", rows[i].w_reward}});
      }
      json j;
      j["command"] = "compare";
      j["reference"] = ref;
      j["order"] = a.order;
      j["rows"] = jr;
      j["best"] = {{"bleu", best(&Row::bleu)},
                   {"naive", best(&Row::naive)},
                   {"w_reward", best(&Row::w_reward)}};
      j["manifest"] = manifest_json(m.get());
      os << j.dump(2) << "\n";
      break;
    }
    case Format::kCsv:
      os << "index,bleu,naive,w_reward,candidate\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        os << i << "," << fmt_double(rows[i].bleu) << ","
           << fmt_double(rows[i].naive) << "," << fmt_double(rows[i].w_reward)
           << ",\"" << cands[i] << "\"\n";
      }
      break;
    case Format::kTable:
      os << "ref: " << ref << "\n";
      os << "  #  bleu      naive     w_reward  candidate\n";
      for (std::size_t i = 0; i < rows.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%3zu  %.6f  %.6f  %.6f  ", i,
                      rows[i].bleu, rows[i].naive, rows[i].w_reward);
        os << buf << cands[i] << "\n";
      }
      break;
  }
  c.emit(os.str());
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::string out_dir = ".";
  bool quiet = false;
};

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) input_error("cannot write '" + p.string() + "'");
  f << text;
}

int run_train(const TrainArgs& a) {
  nwsil_train_config* cfg_raw = nullptr;
  check(nwsil_train_config_load(a.config.c_str(), &cfg_raw),
        "config '" + a.config + "'");
  std::unique_ptr<nwsil_train_config, void (*)(nwsil_train_config*)> cfg(
      cfg_raw, nwsil_train_config_free);

  ManifestPtr m(nwsil_manifest_new("train", nwsil_train_config_seed(cfg.get())));
  if (!m) throw CliError{1, "out of memory"};
  for (std::size_t i = 0; i < nwsil_train_config_num_settings(cfg.get()); ++i) {
    const char* k = nullptr;
    const char* v = nullptr;
    nwsil_train_config_setting(cfg.get(), i, &k, &v);
    nwsil_manifest_set(m.get(), k, v);
  }
  Common::add_input(m.get(), a.config);
  if (const char* in = nwsil_train_config_input(cfg.get())) {
    Common::add_input(m.get(), in);
  }
  const json manifest = manifest_json(m.get());

  std::error_code ec;
  std::filesystem::create_directories(a.out_dir, ec);
  if (ec) input_error("cannot create '" + a.out_dir + "': " + ec.message());
  const std::filesystem::path dir(a.out_dir);

  std::ofstream log(dir / "log.ndjson", std::ios::binary);
  if (!log) input_error("cannot write '" + (dir / "log.ndjson").string() + "'");
  nwsil_train_result* res_raw = nullptr;
  check(nwsil_train_run(
            cfg.get(),
            [](const char* line, void* user) {
              *static_cast<std::ofstream*>(user) << line << "\n";
            },
            &log, &res_raw),
        "train");
  std::unique_ptr<nwsil_train_result, void (*)(nwsil_train_result*)> res(
      res_raw, nwsil_train_result_free);
  log.close();

  char* s = nullptr;
  check(nwsil_train_result_policy_json(res.get(), &s), "policy");
  json policy;
  policy["manifest"] = manifest;
  policy["policy"] = json::parse(take_string(s));
  write_file(dir / "policy.json", policy.dump(2) + "\n");

  check(nwsil_train_result_summary_json(res.get(), &s), "summary");
  json summary;
  summary["command"] = "train";
  const json body = json::parse(take_string(s));
  for (const auto& [k, v] : body.items()) summary[k] = v;
  summary["manifest"] = manifest;
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  if (!a.quiet) std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nwsil: Wasserstein sequence rewards, text metrics and toy "
               "self-imitation training"};
  app.set_version_flag("--version", std::string(nwsil_version()));
  app.require_subcommand(1);

  Common common;

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "per-pair Wasserstein reward and distance");
  sc->add_option("hyp", score.hyp, "hypothesis file, one sentence per line")->required();
  sc->add_option("ref", score.ref, "reference file")->required();
  sc->add_flag("--corpus", score.corpus,
               "score each hypothesis against its best-matching reference line");
  add_common(sc, common, true);
  sc->add_flag("--csv", common.csv, "CSV output");

  NestedArgs nested;
  auto* ne = app.add_subcommand("nested", "nested Wasserstein distance between two corpora");
  ne->add_option("corpus_a", nested.a, "hypothesis corpus")->required();
  ne->add_option("corpus_b", nested.b, "reference corpus")->required();
  ne->add_option("--k", nested.k, "sentences drawn from corpus_a")->capture_default_str();
  ne->add_option("--k-prime", nested.k_prime, "sentences drawn from corpus_b")
      ->capture_default_str();
  add_common(ne, common, true);

  MetricsArgs metrics;
  auto* me = app.add_subcommand("metrics", "test-BLEU, self-BLEU and F1-BLEU");
  me->add_option("hyp", metrics.hyp, "generated corpus")->required();
  me->add_option("ref", metrics.ref, "reference corpus")->required();
  me->add_option("--order", metrics.order, "BLEU order (2..5)")->capture_default_str();
  add_common(me, common, false);

  CompareArgs compare;
  auto* co = app.add_subcommand("compare",
                                "rank candidates against a reference by BLEU, "
                                "naive embedding score and Wasserstein reward");
  co->add_option("sentences", compare.sentences, "reference, then candidates");
  co->add_option("--from", compare.from,
                 "file: first line reference, remaining lines candidates");
  co->add_option("--order", compare.order, "BLEU order")->capture_default_str();
  add_common(co, common, true);
  co->add_flag("--csv", common.csv, "CSV output");

  TrainArgs train;
  auto* tr = app.add_subcommand("train", "toy self-imitation training from a config file");
  tr->add_option("config", train.config, "key = value config file")->required();
  tr->add_option("--out", train.out_dir,
                 "folder for log.ndjson, policy.json, summary.json, manifest.json")
      ->capture_default_str();
  tr->add_flag("--quiet", train.quiet, "do not print the summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sc) return run_score(common, score);
    if (*ne) return run_nested(common, nested);
    if (*me) return run_metrics(common, metrics);
    if (*co) return run_compare(common, compare);
    if (*tr) return run_train(train);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
