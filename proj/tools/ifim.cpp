// ifim: command-line driver for the instruction-aware FIM toolchain.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ifim/assemble.hpp"
#include "ifim/bench.hpp"
#include "ifim/config.hpp"
#include "ifim/corpus.hpp"
#include "ifim/error.hpp"
#include "ifim/eval.hpp"
#include "ifim/format.hpp"
#include "ifim/http_backends.hpp"
#include "ifim/jsonl.hpp"
#include "ifim/parallel.hpp"
#include "ifim/service.hpp"
#include "ifim/synth.hpp"
#include "ifim/text.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string profiles_path;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
};

ifim::PipelineConfig resolve_config(const GlobalOptions& g) {
  ifim::PipelineConfig cfg;
  if (!g.config_path.empty()) cfg = ifim::load_config(g.config_path);
  if (!g.profiles_path.empty()) {
    cfg.profiles = ifim::load_profiles(g.profiles_path);
    cfg.profile = cfg.profiles.front().name;
  }
  if (!g.profile.empty()) cfg.profile = g.profile;
  if (g.seed) cfg.seed = *g.seed;
  if (g.jobs) cfg.jobs = *g.jobs;
  cfg.active_profile();
  return cfg;
}

std::unique_ptr<ifim::synth::SynthBackend> make_synth_backend(const std::string& kind,
                                                              const ifim::PipelineConfig& cfg) {
  if (kind == "mock") return std::make_unique<ifim::synth::MockSynthBackend>();
  if (kind == "http")
    return std::make_unique<ifim::http::ChatSynthBackend>(
        ifim::http::Endpoint::from_env(cfg.synth_model));
  throw ifim::InvalidInput("unknown synthesis backend '" + kind + "'");
}

std::vector<std::string> read_contaminants(const fs::path& path) {
  const auto content = ifim::jsonl::read_file(path);
  std::vector<std::string> out;
  if (path.extension() != ".jsonl") {
    out.push_back(content);
    return out;
  }
  ifim::jsonl::for_each_record(content, [&](const nlohmann::json& j, const std::string&) {
    for (const char* key : {"prompt", "canonical_solution", "code", "text"})
      if (j.contains(key) && j[key].is_string()) out.push_back(j[key].get<std::string>());
  });
  return out;
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  std::string corpus;
  std::string out;
  std::string backend;
  std::vector<std::string> contaminants;
  int retries = -1;
  int min_lines = 1;
  int max_lines = 3;
};

int cmd_synth(const GlobalOptions& g, const SynthOptions& o) {
  const auto cfg = resolve_config(g);
  const auto samples = ifim::corpus::ingest_samples(o.corpus);

  std::vector<std::string> contaminants;
  for (const auto& c : o.contaminants) {
    auto more = read_contaminants(c);
    contaminants.insert(contaminants.end(), more.begin(), more.end());
  }
  const auto clean =
      ifim::parallel::decontaminate(samples, contaminants, ifim::parallel::Exec::parallel);

  std::vector<ifim::corpus::CodeSample> usable;
  for (const auto& s : clean.kept)
    if (!ifim::text::is_blank(s.code)) usable.push_back(s);
  const std::size_t skipped = clean.kept.size() - usable.size();

  const auto triplets = ifim::parallel::select_spans(usable, cfg.seed, ifim::parallel::Exec::parallel,
                                                     o.min_lines, o.max_lines);
  auto backend = make_synth_backend(o.backend.empty() ? cfg.synth_backend : o.backend, cfg);
  const auto batch = ifim::synth::synthesize_batch(
      *backend, triplets, o.retries >= 0 ? o.retries : cfg.synth_retries, cfg.synth_in_flight);

  std::string out;
  std::size_t written = 0, rejected = 0, failed = 0;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    if (!batch.errors[i].empty()) {
      ++failed;
      std::cerr << "synth: " << triplets[i].sample_id << ": " << batch.errors[i] << "\n";
    } else if (batch.results[i].accepted()) {
      out += ifim::jsonl::dump(ifim::corpus::to_json(*batch.results[i].record));
      out.push_back('\n');
      ++written;
    } else {
      ++rejected;
    }
  }
  ifim::jsonl::write_file(o.out, out);
  std::cout << "ingested=" << samples.size() << " removed=" << clean.removed.size()
            << " skipped=" << skipped << " rejected=" << rejected << " failed=" << failed
            << " written=" << written << "\n";
  return failed == 0 ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct FormatOptions {
  std::string dataset;
  std::string out;
  std::string mode;
  double ratio = 1.0;
  bool cfim = false;
};

int cmd_format(const GlobalOptions& g, const FormatOptions& o) {
  const auto cfg = resolve_config(g);
  const auto& profile = cfg.active_profile();
  const ifim::format::Mode mode =
      o.mode.empty() ? ifim::format::Mode{profile.default_mode} : ifim::format::parse_mode(o.mode);

  std::vector<ifim::corpus::InstructionRecord> records;
  for (auto& r : ifim::corpus::read_records(o.dataset)) records.push_back(std::move(r.record));

  auto mixed = ifim::corpus::mix_ratio(records, o.ratio, cfg.seed);
  if (o.cfim)
    for (auto& r : mixed.records) r.tag = ifim::corpus::Tag::cfim;

  const auto examples = ifim::parallel::build_training_examples(mixed.records, mode, profile,
                                                                ifim::parallel::Exec::parallel);
  std::string out;
  std::map<std::string, std::size_t> counts;
  for (const auto& ex : examples) {
    out += ifim::jsonl::dump(ifim::format::to_json(ex));
    out.push_back('\n');
    ++counts[std::string(ifim::corpus::to_string(ex.tag))];
  }
  ifim::jsonl::write_file(o.out, out);
  std::cout << "records=" << examples.size();
  for (const auto& [tag, n] : counts) std::cout << " " << tag << "=" << n;
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchOptions {
  std::string problems;
  std::string origin = "humaneval";
  std::string out;
  std::string backend = "none";
  std::string subset = "auto";
  std::string report;
  double confidence = 0.95;
  double margin = 0.05;
};

std::vector<ifim::bench::BenchmarkTask> derive_humaneval(std::string_view content) {
  std::vector<ifim::bench::BenchmarkTask> tasks;
  for (const auto& p : ifim::bench::read_humaneval(content)) {
    const auto program = ifim::bench::strip_docstrings(p.prompt + p.canonical_solution);
    const auto& sol = p.canonical_solution;
    std::vector<ifim::bench::BenchmarkTask> derived;
    if (program.size() >= sol.size() && program.compare(program.size() - sol.size(), sol.size(), sol) == 0) {
      derived = ifim::bench::derive_single_line_tasks(
          p.task_id, sol, p.test_program(), std::string_view(program).substr(0, program.size() - sol.size()),
          ifim::bench::Origin::humaneval_infilling);
    } else {
      // The solution itself carried a docstring; every program line is a candidate.
      derived = ifim::bench::derive_single_line_tasks(p.task_id, program, p.test_program(), {},
                                                      ifim::bench::Origin::humaneval_infilling);
    }
    tasks.insert(tasks.end(), derived.begin(), derived.end());
  }
  return tasks;
}

int cmd_bench(const GlobalOptions& g, const BenchOptions& o) {
  const auto cfg = resolve_config(g);
  const auto origin = ifim::bench::parse_origin(o.origin);
  const auto content = ifim::jsonl::read_file(o.problems);

  std::vector<ifim::bench::BenchmarkTask> tasks;
  if (origin == ifim::bench::Origin::humaneval_infilling) {
    tasks = derive_humaneval(content);
  } else {
    tasks = ifim::bench::read_tasks_from(content);
    for (auto& t : tasks) {
      t.origin = origin;
      if (origin == ifim::bench::Origin::repomastereval) t = ifim::bench::truncate_context(std::move(t));
    }
  }
  const std::size_t derived = tasks.size();

  std::size_t n = derived;
  if (o.subset == "auto") {
    n = derived == 0 ? 0 : ifim::bench::sample_size(derived, o.confidence, o.margin);
  } else if (o.subset != "all") {
    n = std::stoul(o.subset);
  }
  tasks = ifim::bench::draw_subset(tasks, n, cfg.seed);

  std::size_t rejected = 0, failed = 0;
  if (o.backend != "none") {
    auto backend = make_synth_backend(o.backend, cfg);
    auto report = ifim::bench::attach_instructions(std::move(tasks), *backend, cfg.synth_retries,
                                                   cfg.synth_in_flight);
    tasks = std::move(report.tasks);
    rejected = report.rejected.size();
    failed = report.failed.size();
    if (!o.report.empty()) {
      std::string text;
      for (const auto& id : report.rejected) text += "rejected\t" + id + "\n";
      for (const auto& [id, err] : report.failed) text += "failed\t" + id + "\t" + err + "\n";
      ifim::jsonl::write_file(o.report, text);
    }
  }

  std::string out;
  std::size_t with_instruction = 0;
  for (const auto& t : tasks) {
    out += ifim::jsonl::dump(ifim::bench::to_json(t));
    out.push_back('\n');
    with_instruction += t.instruction.has_value();
  }
  ifim::jsonl::write_file(o.out, out);
  std::cout << "derived=" << derived << " subset=" << tasks.size()
            << " instructions=" << with_instruction << " rejected=" << rejected
            << " failed=" << failed << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string benchmark;
  std::string backend = "oracle";
  std::string answers;
  std::string mode;
  bool with_instruction = false;
  bool both = false;
  std::string out;
  std::string report;
  std::string model_name;
  std::string benchmark_name;
  double timeout_s = -1;
};

std::map<std::string, std::string> read_answers(const fs::path& path) {
  std::map<std::string, std::string> out;
  ifim::jsonl::for_each_record(ifim::jsonl::read_file(path),
                               [&](const nlohmann::json& j, const std::string& where) {
                                 out[ifim::jsonl::required_string(j, "task_id", where)] =
                                     ifim::jsonl::required_string(j, "completion", where);
                               });
  return out;
}

int cmd_eval(const GlobalOptions& g, const EvalOptions& o) {
  const auto cfg = resolve_config(g);
  const auto& profile = cfg.active_profile();
  const auto tasks = ifim::bench::read_tasks(o.benchmark);

  ifim::eval::EvalConfig base;
  base.max_new_tokens = cfg.max_new_tokens;
  base.greedy = true;
  base.mode = o.mode.empty() ? ifim::format::Mode{profile.default_mode}
                             : ifim::format::parse_mode(o.mode);
  base.sentinels = profile.sentinels;
  base.stop = profile.stop;
  base.timeout_s = o.timeout_s > 0 ? o.timeout_s : cfg.timeout_s;
  base.interpreter = cfg.interpreter;
  base.jobs = cfg.jobs;

  std::vector<bool> settings;
  if (o.both) settings = {true, false};
  else settings = {o.with_instruction};

  const std::string bench_name =
      o.benchmark_name.empty() ? fs::path(o.benchmark).stem().string() : o.benchmark_name;
  std::map<ifim::eval::RunKey, std::vector<ifim::eval::EvalResult>> runs;
  for (bool with : settings) {
    auto run_cfg = base;
    run_cfg.with_instruction = with;
    if (const auto* m = std::get_if<ifim::format::IfimMode>(&run_cfg.mode); m && !with)
      run_cfg.mode = m->base;

    std::unique_ptr<ifim::eval::CompletionBackend> backend;
    if (o.backend == "oracle") {
      backend = std::make_unique<ifim::eval::OracleBackend>(tasks, run_cfg);
    } else if (o.backend == "scripted") {
      if (o.answers.empty()) throw ifim::InvalidInput("--backend scripted needs --answers");
      backend = std::make_unique<ifim::eval::ScriptedBackend>(
          ifim::eval::ScriptedBackend::for_tasks(tasks, run_cfg, read_answers(o.answers)));
    } else if (o.backend == "http") {
      auto stop = profile.stop;
      stop.insert(stop.begin(), {profile.sentinels.mid, profile.sentinels.pre, profile.sentinels.suf});
      backend = std::make_unique<ifim::http::CompletionsBackend>(
          ifim::http::Endpoint::from_env(cfg.eval_model), stop);
    } else {
      throw ifim::InvalidInput("unknown completion backend '" + o.backend + "'");
    }

    auto results = ifim::eval::run_benchmark(*backend, tasks, run_cfg);
    if (!o.out.empty()) {
      std::string lines;
      for (const auto& r : results) {
        lines += ifim::jsonl::dump(ifim::eval::to_json(r));
        lines.push_back('\n');
      }
      ifim::jsonl::write_file(o.out + (with ? ".with_ins.jsonl" : ".without_ins.jsonl"), lines);
    }
    const std::string model = o.model_name.empty() ? backend->name() : o.model_name;
    runs[{model, bench_name, with}] = std::move(results);
  }

  const auto table = ifim::eval::report_table(runs);
  std::cout << table.to_text();
  if (!o.report.empty()) ifim::jsonl::write_file(o.report, table.to_csv());
  return 0;
}

// ---------------------------------------------------------------------------

struct AssembleOptions {
  std::string file;
  std::optional<std::size_t> cursor;
  std::string language = "python";
  bool json = false;
};

int cmd_assemble(const GlobalOptions& g, const AssembleOptions& o) {
  const auto cfg = resolve_config(g);
  const auto& profile = cfg.active_profile();
  ifim::assemble::CursorContext ctx;
  ctx.source = ifim::jsonl::read_file(o.file);
  ctx.cursor = o.cursor.value_or(ctx.source.size());
  ctx.language = o.language;
  const auto req = ifim::assemble::parse_request(ctx, profile.markers, profile.name);
  const auto input = ifim::assemble::assemble_input(req, profile);
  if (o.json) {
    nlohmann::json j = {{"input", input}, {"model_profile", profile.name}};
    if (req.instruction) j["instruction"] = *req.instruction;
    std::cout << ifim::jsonl::dump(j) << "\n";
  } else {
    std::cout << input;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ServeOptions {
  std::string bind = "127.0.0.1:8080";
  std::string backend = "none";
};

ifim::service::InfillService* g_service = nullptr;

int cmd_serve(const GlobalOptions& g, const ServeOptions& o) {
  const auto cfg = resolve_config(g);
  const auto colon = o.bind.rfind(':');
  if (colon == std::string::npos) throw ifim::InvalidInput("--bind expects host:port");
  const auto host = o.bind.substr(0, colon);
  const int port = std::stoi(o.bind.substr(colon + 1));

  std::shared_ptr<ifim::eval::CompletionBackend> backend;
  if (o.backend == "http") {
    const auto& p = cfg.active_profile();
    auto stop = p.stop;
    stop.insert(stop.begin(), {p.sentinels.mid, p.sentinels.pre, p.sentinels.suf});
    backend = std::make_shared<ifim::http::CompletionsBackend>(
        ifim::http::Endpoint::from_env(cfg.eval_model), stop);
  } else if (o.backend != "none") {
    throw ifim::InvalidInput("--backend must be none or http");
  }
  ifim::service::InfillService service(cfg.profiles, backend, cfg.max_new_tokens);
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  std::cerr << "serving on " << host << ":" << port << "\n";
  const bool ok = service.listen(host, port);
  g_service = nullptr;
  if (!ok) {
    std::cerr << "could not bind " << o.bind << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instruction-aware fill-in-the-middle data and evaluation toolchain"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Pipeline config (JSON)");
  app.add_option("--profiles", g.profiles_path, "Model profile file (JSON)");
  app.add_option("--profile", g.profile, "Model profile to use");
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--jobs", g.jobs, "Worker count (0 = CPU count)");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Build an instruction dataset from a code corpus");
  synth->add_option("--corpus", so.corpus, "Corpus JSONL")->required();
  synth->add_option("--out", so.out, "Output record JSONL")->required();
  synth->add_option("--backend", so.backend, "mock | http");
  synth->add_option("--contaminants", so.contaminants, "Benchmark files to decontaminate against");
  synth->add_option("--retries", so.retries, "Extra attempts per sample");
  synth->add_option("--min-lines", so.min_lines, "Shortest middle span");
  synth->add_option("--max-lines", so.max_lines, "Longest middle span");

  FormatOptions fo;
  auto* fmt = app.add_subcommand("format", "Render training examples from a record dataset");
  fmt->add_option("--dataset", fo.dataset, "Record JSONL")->required();
  fmt->add_option("--out", fo.out, "Training-example JSONL")->required();
  fmt->add_option("--mode", fo.mode, "IFIM or FIM mode, e.g. PSIM (default: profile default)");
  fmt->add_option("--ratio", fo.ratio, "Fraction of records rendered with instructions")
      ->check(CLI::Range(0.0, 1.0));
  fmt->add_flag("--cfim", fo.cfim, "Render every record as a comment-instruction baseline");

  BenchOptions bo;
  auto* bench = app.add_subcommand("bench", "Derive an instruction-augmented infilling benchmark");
  bench->add_option("--problems", bo.problems, "HumanEval problems or extracted task JSONL")->required();
  bench->add_option("--origin", bo.origin, "humaneval | rme | custom");
  bench->add_option("--out", bo.out, "Benchmark JSONL")->required();
  bench->add_option("--backend", bo.backend, "none | mock | http");
  bench->add_option("--subset", bo.subset, "auto | all | <count>");
  bench->add_option("--report", bo.report, "Write rejected/failed task ids here");
  bench->add_option("--confidence", bo.confidence, "Subset confidence level");
  bench->add_option("--margin", bo.margin, "Subset margin of error");

  EvalOptions eo;
  auto* ev = app.add_subcommand("eval", "Evaluate a completion backend with Pass@1");
  ev->add_option("--benchmark", eo.benchmark, "Benchmark JSONL")->required();
  ev->add_option("--backend", eo.backend, "oracle | scripted | http");
  ev->add_option("--answers", eo.answers, "Scripted answers JSONL {task_id, completion}");
  ev->add_option("--mode", eo.mode, "Mode used with instructions (default: profile default)");
  ev->add_flag("--with-instruction", eo.with_instruction, "Evaluate with instructions");
  ev->add_flag("--both", eo.both, "Evaluate with and without instructions");
  ev->add_option("--out", eo.out, "Results path prefix");
  ev->add_option("--report", eo.report, "CSV report path");
  ev->add_option("--model-name", eo.model_name, "Row label");
  ev->add_option("--benchmark-name", eo.benchmark_name, "Column label");
  ev->add_option("--timeout", eo.timeout_s, "Seconds per candidate");

  AssembleOptions ao;
  auto* as = app.add_subcommand("assemble", "Assemble a completion input from a source file");
  as->add_option("--file", ao.file, "Source file")->required();
  as->add_option("--cursor", ao.cursor, "Cursor byte offset (default: end of file)");
  as->add_option("--language", ao.language, "Language tag");
  as->add_flag("--json", ao.json, "Print JSON instead of the raw input");

  ServeOptions sv;
  auto* serve = app.add_subcommand("serve", "Serve /v1/infill for editor plugins");
  serve->add_option("--bind", sv.bind, "host:port");
  serve->add_option("--backend", sv.backend, "none | http");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(g, so);
    if (fmt->parsed()) return cmd_format(g, fo);
    if (bench->parsed()) return cmd_bench(g, bo);
    if (ev->parsed()) return cmd_eval(g, eo);
    if (as->parsed()) return cmd_assemble(g, ao);
    if (serve->parsed()) return cmd_serve(g, sv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
