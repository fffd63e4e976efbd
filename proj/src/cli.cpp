#include "dftclk/cli.hpp"

#include "dftclk/atpg.hpp"
#include "dftclk/capture.hpp"
#include "dftclk/cpf.hpp"
#include "dftclk/faults.hpp"
#include "dftclk/netlist.hpp"
#include "dftclk/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace dftclk {

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Mismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text)
{
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw InputError("cannot write '" + path.string() + "'");
}

Netlist load_circuit(const fs::path& path) { return parse_netlist(read_file(path)); }

std::string circuit_name(const fs::path& path) { return path.stem().string(); }

// `--config FILE` holds `key = value` lines; a key stands for the flag `--key`
// and is only applied when the command line does not set that flag itself.
void apply_config(std::vector<std::string>& args)
{
  std::optional<std::string> file;
  for (std::size_t i = 1; i < args.size();) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file");
      file = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  if (!file) return;
  std::istringstream is(read_file(*file));
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos)
      throw InputError(*file + ":" + std::to_string(number) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw InputError(*file + ":" + std::to_string(number) + ": empty key");
    const std::string flag = "--" + key;
    const bool given = std::any_of(args.begin() + 1, args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) args.push_back(flag + "=" + value);
  }
}

Experiment experiment_of(const std::string& letter)
{
  const auto e = parse_experiment(letter);
  if (!e) throw CLI::ValidationError("--experiment", "expected one of a, b, c, d, e");
  return *e;
}

std::string report_text(const std::string& name, std::span<const ReportRow> rows)
{
  return "# " + name + "\n" + emit_report(rows);
}

struct AtpgFlags {
  std::string circuit;
  std::string experiment;
  std::uint64_t seed = 0;
  unsigned backtrack = 200;
  bool no_compact = false;
  unsigned jobs = 1;
  std::string out;
};

void add_generation_flags(CLI::App* cmd, AtpgFlags& f)
{
  cmd->add_option("--seed", f.seed, "Seed of the random fill")->envname("DFTCLK_SEED");
  cmd->add_option("--backtrack", f.backtrack, "Backtrack budget per fault and procedure")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--no-compact", f.no_compact, "Keep every generated pattern");
  cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

AtpgOptions options_of(const AtpgFlags& f)
{
  AtpgOptions o;
  o.seed = f.seed;
  o.backtrack_limit = f.backtrack;
  o.compact = !f.no_compact;
  o.jobs = f.jobs;
  return o;
}

// Checks that hold for every generated set; a failure is a tool defect.
void require_sound(const std::string& what, const AtpgResult& r)
{
  if (r.unconfirmed != 0)
    throw Mismatch(what + ": " + std::to_string(r.unconfirmed) + " detections not confirmed by fault simulation");
  if (r.contradictions != 0)
    throw Mismatch(what + ": " + std::to_string(r.contradictions) + " faults marked untestable were detected");
}

void write_experiment(const fs::path& dir, const Netlist& n, const ExperimentResult& r)
{
  write_file(dir / "patterns.txt", r.tester_program);
  write_file(dir / "faults.txt", dump_faults(n, r.atpg.faults, r.atpg.records, r.atpg.patterns));
  const ReportRow row = report_row(r.experiment, r.atpg.stats);
  write_file(dir / "report.txt", emit_report(std::span(&row, 1)));
}

int cmd_check(const std::string& path, std::ostream& out)
{
  const Netlist n = load_circuit(path);
  const auto scan = std::count_if(n.flops().begin(), n.flops().end(), [](const FlipFlop& f) { return f.is_scan(); });
  out << circuit_name(path) << ": " << n.gates().size() << " gates, " << n.flops().size() << " flops (" << scan
      << " scan), " << n.domains().size() << " domains, " << n.chains().size() << " chains, "
      << n.primary_inputs().size() << " inputs, " << n.primary_outputs().size() << " outputs, "
      << fault_sites(n).size() << " fault sites\n";
  return kExitOk;
}

int cmd_atpg(const AtpgFlags& f, std::ostream& out)
{
  const Experiment e = experiment_of(f.experiment);
  const Netlist n = load_circuit(f.circuit);
  const ExperimentResult r = run_experiment(n, e, options_of(f));
  require_sound(circuit_name(f.circuit), r.atpg);
  if (!f.out.empty()) write_experiment(f.out, n, r);
  const ReportRow row = report_row(e, r.atpg.stats);
  out << emit_report(std::span(&row, 1));
  return kExitOk;
}

int cmd_faultsim(const std::string& circuit, const std::string& patterns_path, const std::string& letter,
                 unsigned jobs, const std::string& out_dir, std::ostream& out)
{
  const Experiment e = experiment_of(letter);
  const Netlist n = load_circuit(circuit);
  const ClockingRegime regime = experiment_regime(e);
  const PatternSet patterns = read_tester_patterns(n, read_file(patterns_path), regime);
  const auto faults = enumerate_faults(n, regime_fault_model(regime));
  const auto records = fault_simulate(n, patterns, faults, {jobs, false});
  const StatsReport stats = compute_stats(records, patterns.size());
  // Without test generation nothing is known to be untestable.
  const ReportRow row{std::string("(") + experiment_letter(e) + ")", stats.tc_hundredths, stats.pattern_count,
                      std::nullopt};
  if (!out_dir.empty()) {
    write_file(fs::path(out_dir) / "faults.txt", dump_faults(n, faults, records, patterns));
    write_file(fs::path(out_dir) / "report.txt", emit_report(std::span(&row, 1)));
  }
  out << emit_report(std::span(&row, 1));
  return kExitOk;
}

struct CpfFlags {
  int pulses = 2;
  std::size_t scenarios = 1000;
  std::uint64_t seed = 0;
  int latency = 3;
  int ratio = 1;
  int shift_stages = 0;
  std::string dump;
};

int cmd_cpf_verify(const CpfFlags& f, std::ostream& out, std::ostream& err)
{
  CpfConfig config;
  config.pulse_count = f.pulses;
  config.latency_ticks = f.latency;
  config.pll_ratio = f.ratio;
  const StructuralCpf cpf = build_structural_cpf(config, f.shift_stages);
  const EquivalenceReport rep = check_equivalence(cpf, config, f.scenarios, f.seed);
  if (!f.dump.empty()) {
    TickWaveform wave = rep.evidence;
    if (rep.pass) {
      // First scenario of the run.
      std::mt19937_64 rng(f.seed);
      const CpfScenario sc = random_scenario(rng, config);
      wave = simulate_cpf(cpf, sc.scan_en, sc.scan_clk);
    }
    write_file(f.dump, wave.dump());
  }
  if (!rep.pass) {
    for (const auto& msg : rep.failures) err << "cpf-verify: " << msg << '\n';
    return kExitMismatch;
  }
  out << "cpf-verify: " << rep.scenarios << " scenarios, " << rep.bursts << " bursts of " << f.pulses
      << " pulses, structural and behavioral clk_out identical\n";
  return kExitOk;
}

std::vector<fs::path> bench_circuits(const std::vector<std::string>& circuits, const std::string& bench)
{
  std::vector<fs::path> paths(circuits.begin(), circuits.end());
  if (!bench.empty()) {
    if (!fs::is_directory(bench)) throw InputError("'" + bench + "' is not a directory");
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(bench))
      if (entry.path().extension() == ".net") found.push_back(entry.path());
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  if (paths.empty()) throw CLI::RequiredError("--circuit or --bench");
  return paths;
}

int cmd_experiment(const AtpgFlags& f, bool all, const std::vector<std::string>& letters,
                   const std::vector<std::string>& circuits, const std::string& bench, std::ostream& out)
{
  std::vector<Experiment> experiments;
  if (all) experiments.assign(std::begin(kAllExperiments), std::end(kAllExperiments));
  for (const auto& l : letters) experiments.push_back(experiment_of(l));
  if (experiments.empty()) throw CLI::RequiredError("--all or --experiment");
  const auto paths = bench_circuits(circuits, bench);
  const AtpgOptions options = options_of(f);
  std::string summary;
  for (const auto& path : paths) {
    const Netlist n = load_circuit(path);
    const std::string name = circuit_name(path);
    std::vector<ReportRow> rows;
    for (Experiment e : experiments) {
      const ExperimentResult r = run_experiment(n, e, options);
      require_sound(name + " (" + experiment_letter(e) + ")", r.atpg);
      if (!f.out.empty()) write_experiment(fs::path(f.out) / name / std::string(1, experiment_letter(e)), n, r);
      rows.push_back(report_row(e, r.atpg.stats));
    }
    const std::string text = report_text(name, rows);
    out << text;
    summary += text;
  }
  if (!f.out.empty()) write_file(fs::path(f.out) / "report.txt", summary);
  return kExitOk;
}

// Re-emits report files: `# <title>` lines start a table, as written by
// `experiment`; a file without them is one untitled table.
int cmd_report(const std::vector<std::string>& files, std::ostream& out)
{
  for (const auto& file : files) {
    std::istringstream is(read_file(file));
    std::string line, title, body;
    auto flush = [&] {
      if (body.find_first_not_of(" \n") == std::string::npos) return;
      std::vector<ReportRow> rows;
      try {
        rows = parse_report(body);
      } catch (const std::invalid_argument& e) {
        throw InputError(file + ": " + e.what());
      }
      if (rows.empty()) throw InputError(file + ": table without rows");
      out << (title.empty() ? "" : "# " + title + "\n") << emit_report(rows);
      body.clear();
    };
    while (std::getline(is, line)) {
      if (line.rfind("# ", 0) == 0) {
        flush();
        title = line.substr(2);
      } else {
        body += line + '\n';
      }
    }
    flush();
  }
  return kExitOk;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err)
{
  CLI::App app("Clock-domain aware scan test generation and pulse filter verification", "dftclk");
  app.require_subcommand(1);

  std::string check_path;
  auto* check = app.add_subcommand("check", "Parse a circuit and print its size");
  check->add_option("circuit", check_path, "Netlist file")->required();

  AtpgFlags atpg_flags;
  auto* atpg = app.add_subcommand("atpg", "Generate tests for one experiment");
  atpg->add_option("--circuit", atpg_flags.circuit, "Netlist file")->required();
  atpg->add_option("--experiment", atpg_flags.experiment, "Experiment a..e")->required();
  atpg->add_option("--out", atpg_flags.out, "Directory for patterns.txt, faults.txt and report.txt");
  add_generation_flags(atpg, atpg_flags);

  std::string fs_circuit, fs_patterns, fs_experiment, fs_out;
  unsigned fs_jobs = 1;
  auto* faultsim = app.add_subcommand("faultsim", "Fault-simulate a pattern file");
  faultsim->add_option("--circuit", fs_circuit, "Netlist file")->required();
  faultsim->add_option("--patterns", fs_patterns, "Tester program written by atpg")->required();
  faultsim->add_option("--experiment", fs_experiment, "Experiment a..e the patterns belong to")->required();
  faultsim->add_option("--jobs", fs_jobs, "Worker threads")->check(CLI::PositiveNumber);
  faultsim->add_option("--out", fs_out, "Directory for faults.txt and report.txt");

  CpfFlags cpf_flags;
  auto* cpf = app.add_subcommand("cpf-verify", "Compare the structural and behavioral pulse filters");
  cpf->add_option("--pulses", cpf_flags.pulses, "Pulses per burst")->check(CLI::IsMember({2, 3, 4}));
  cpf->add_option("--scenarios", cpf_flags.scenarios, "Random scenarios");
  cpf->add_option("--seed", cpf_flags.seed, "Scenario seed")->envname("DFTCLK_SEED");
  cpf->add_option("--latency", cpf_flags.latency, "PLL cycles from trigger to first pulse")
      ->check(CLI::PositiveNumber);
  cpf->add_option("--ratio", cpf_flags.ratio, "Base ticks per PLL cycle")->check(CLI::PositiveNumber);
  cpf->add_option("--shift-stages", cpf_flags.shift_stages,
                  "Build the filter with this many shift stages instead of the correct count")
      ->check(CLI::PositiveNumber);
  cpf->add_option("--dump-waveform", cpf_flags.dump, "Write the waveform of the first or the failing scenario");

  AtpgFlags exp_flags;
  bool exp_all = false;
  std::vector<std::string> exp_letters, exp_circuits;
  std::string exp_bench;
  auto* experiment = app.add_subcommand("experiment", "Run experiments over circuits and print coverage tables");
  experiment->add_flag("--all", exp_all, "Run experiments a..e");
  experiment->add_option("--experiment", exp_letters, "Experiment a..e (repeatable)");
  experiment->add_option("--circuit", exp_circuits, "Netlist file (repeatable)");
  experiment->add_option("--bench", exp_bench, "Directory whose .net files are all run");
  experiment->add_option("--out", exp_flags.out, "Directory for report.txt and per-experiment outputs");
  add_generation_flags(experiment, exp_flags);

  std::vector<std::string> report_files;
  auto* report = app.add_subcommand("report", "Re-emit report files as aligned tables");
  report->add_option("files", report_files, "report.txt files")->required();

  try {
    apply_config(args);
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (*check) return cmd_check(check_path, out);
    if (*atpg) return cmd_atpg(atpg_flags, out);
    if (*faultsim) return cmd_faultsim(fs_circuit, fs_patterns, fs_experiment, fs_jobs, fs_out, out);
    if (*cpf) return cmd_cpf_verify(cpf_flags, out, err);
    if (*experiment) return cmd_experiment(exp_flags, exp_all, exp_letters, exp_circuits, exp_bench, out);
    return cmd_report(report_files, out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const Mismatch& e) {
    err << "dftclk: " << e.what() << '\n';
    return kExitMismatch;
  } catch (const std::exception& e) {
    err << "dftclk: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace dftclk
