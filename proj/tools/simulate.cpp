// simulate: scenario runner, SNR sweeps and corpus export.
//
//   simulate run    --config <path> [--ledger <csv>] [--responses <jsonl>]
//   simulate sweep  --config <path> --out <csv>
//   simulate corpus --spec <path> --out <dir>
//
// Exit codes: 0 success, 1 runtime failure, 2 config error, 3 oracle-script gap.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "png_writer.hpp"
#include "semlink/semlink.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

json summary_json(const semlink::sim::ScenarioConfig& cfg, const semlink::sim::RunResult& r) {
  using namespace semlink;
  json cells = json::array();
  const auto rows = sim::summarize_cells(r);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = rows[i];
    const auto& st = r.stats[i];
    json c = {{"snr_db", s.cell.snr_db},
              {"seed", s.cell.seed},
              {"n", s.cell.n},
              {"tasks", r.outcomes[i].size()},
              {"success_rate", s.success},
              {"mean_payload_bytes", s.payload_bytes},
              {"mean_complex_symbols", s.complex_symbols},
              {"delivered_fraction", s.delivered},
              {"probes", st.probes},
              {"consistency_checks", st.consistency_checks},
              {"fallbacks", st.fallbacks}};
    if (s.psnr_db) c["mean_psnr_db"] = *s.psnr_db;
    if (s.coverage) c["mean_coverage"] = *s.coverage;
    cells.push_back(std::move(c));
  }
  json bw = json::object();
  if (!r.ledger.empty()) {
    const auto summary = metrics::bandwidth_summary(sim::ledger_records(r));
    auto chain = [](const metrics::ChainSummary& s) {
      return json{{"count", s.count},           {"total_bytes", s.total_bytes}, {"total_symbols", s.total_symbols},
                  {"mean_bytes", s.mean_bytes}, {"mean_symbols", s.mean_symbols},
                  {"bytes_quartiles", {s.bytes_q25, s.bytes_q50, s.bytes_q75}},
                  {"symbols_quartiles", {s.symbols_q25, s.symbols_q50, s.symbols_q75}}};
    };
    for (const auto& [name, s] : summary.per_chain) bw[name] = chain(s);
    bw["overall"] = chain(summary.overall);
  }
  return {{"scenario", cfg.name},
          {"mode", std::string(sim::to_string(cfg.mode))},
          {"chain", std::string(phy::to_string(cfg.chain))},
          {"corpus_size", r.corpus_size},
          {"kept", r.kept.size()},
          {"cells", cells},
          {"bandwidth", bw}};
}

int cmd_run(const std::string& config, const std::string& ledger, const std::string& responses) {
  const auto cfg = semlink::sim::load_config(config);
  const auto r = semlink::sim::run_scenario(cfg);
  if (!ledger.empty()) write_text(ledger, semlink::sim::ledger_csv(r));
  if (!responses.empty()) {
    std::string lines;
    for (const auto& e : r.responses)
      lines += json{{"cell", e.cell}, {"step", e.step}, {"task_id", e.task_id}, {"response", e.response}}.dump() + "\n";
    write_text(responses, lines);
  }
  for (const auto& l : r.log) std::cerr << l << "\n";
  std::cout << summary_json(cfg, r).dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& config, const std::string& out) {
  const auto cfg = semlink::sim::load_config(config);
  const auto r = semlink::sim::run_scenario(cfg);
  const fs::path path(out);
  write_text(path, semlink::sim::sweep_csv(cfg, r));
  const fs::path bw = path.parent_path() / (path.stem().string() + "_bandwidth.csv");
  write_text(bw, semlink::sim::bandwidth_csv(r));
  std::cout << "wrote " << r.cells.size() << " rows to " << path.string() << " and " << bw.string() << "\n";
  return 0;
}

int cmd_corpus(const std::string& spec_path, const std::string& out) {
  const auto spec = semlink::io::corpus_spec_from_json(semlink::io::read_json_file(spec_path));
  fs::create_directories(out);
  std::string records;
  for (int i = 0; i < spec.count; ++i) {
    const auto item = semlink::corpus::generate_item(spec, i);
    semlink::cli::write_png((fs::path(out) / (item.annotation.id + ".png")).string(), item.image);
    auto rec = semlink::io::to_json(item.annotation);
    rec["image"] = item.annotation.id + ".png";
    records += rec.dump() + "\n";
  }
  write_text(fs::path(out) / "annotations.jsonl", records);
  std::cout << "wrote " << spec.count << " images to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intention-aware semantic uplink simulator"};
  app.require_subcommand(1);

  std::string config, out, ledger, responses, spec;
  auto* run = app.add_subcommand("run", "Run a scenario and print a JSON summary");
  run->add_option("--config", config, "Scenario config (JSON)")->required();
  run->add_option("--ledger", ledger, "Write the transmission ledger as CSV");
  run->add_option("--responses", responses, "Write task responses as JSON lines");

  auto* sweep = app.add_subcommand("sweep", "Run the snr x seed x n cross product and write CSV");
  sweep->add_option("--config", config, "Scenario config (JSON)")->required();
  sweep->add_option("--out", out, "Output CSV path")->required();

  auto* corpus = app.add_subcommand("corpus", "Render a synthetic corpus to PNG + JSON lines");
  corpus->add_option("--spec", spec, "Corpus spec (JSON)")->required();
  corpus->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config, ledger, responses);
    if (*sweep) return cmd_sweep(config, out);
    return cmd_corpus(spec, out);
  } catch (const semlink::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const semlink::OracleGapError& e) {
    std::cerr << "oracle gap: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
