// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
//
//   acceptance --bench DIR --work DIR [--unit-tests PATH]

#include "dftclk/atpg.hpp"
#include "dftclk/capture.hpp"
#include "dftclk/cli.hpp"
#include "dftclk/cpf.hpp"
#include "dftclk/faults.hpp"
#include "dftclk/netlist.hpp"
#include "dftclk/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace dftclk;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fixed(double v, int digits = 1)
{
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string read_file(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> problems;

  void fail(const std::string& why)
  {
    pass = false;
    if (problems.size() < 8) problems.push_back(why);
  }
};

int failures = 0;

void print(int id, const std::string& title, const Outcome& o)
{
  if (!o.pass) ++failures;
  std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << title;
  if (!o.detail.empty()) std::cout << ": " << o.detail;
  std::cout << '\n';
  for (const auto& p : o.problems) std::cout << "    " << p << '\n';
  std::cout.flush();
}

struct Circuit {
  std::string name;
  fs::path path;
  Netlist netlist;
};

// Status column of faults.txt, one entry per fault in enumeration order.
std::vector<std::string> fault_statuses(const fs::path& file)
{
  std::vector<std::string> out;
  std::istringstream is(read_file(file));
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string site, kind, polarity, status;
    ls >> site >> kind >> polarity >> status;
    out.push_back(status);
  }
  return out;
}

ReportRow single_row(const fs::path& file)
{
  const auto rows = parse_report(read_file(file));
  if (rows.size() != 1) throw std::runtime_error(file.string() + ": expected one row");
  return rows.front();
}

std::map<std::string, std::string> tree(const fs::path& root)
{
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = read_file(e.path());
  return files;
}

Outcome cpf_equivalence()
{
  Outcome o;
  CpfConfig config;
  config.pulse_count = 2;
  const auto t0 = Clock::now();
  const EquivalenceReport rep = check_equivalence(build_structural_cpf(config), config, 1000, 20260101);
  const double t = seconds_since(t0);
  if (!rep.pass)
    for (const auto& f : rep.failures) o.fail(f);
  if (rep.scenarios != 1000) o.fail("ran " + std::to_string(rep.scenarios) + " scenarios");
  if (t >= 10.0) o.fail("took " + fixed(t) + " s");
  o.detail = std::to_string(rep.scenarios) + " scenarios, " + std::to_string(rep.bursts) +
             " bursts, behavioral == structural, two pulses per burst three ticks after the trigger, no glitches, " + fixed(t, 2) + " s";
  return o;
}

struct MatrixRun {
  int exit_code = 0;
  std::string out, err;
  double seconds = 0;
};

MatrixRun run_matrix(const fs::path& bench, const fs::path& out, unsigned jobs)
{
  fs::remove_all(out);
  std::ostringstream so, se;
  const auto t0 = Clock::now();
  MatrixRun r;
  r.exit_code = run_cli({"dftclk", "experiment", "--all", "--bench", bench.string(), "--seed", "0", "--jobs",
                         std::to_string(jobs), "--out", out.string()},
                        so, se);
  r.seconds = seconds_since(t0);
  r.out = so.str();
  r.err = se.str();
  return r;
}

Outcome determinism(const std::vector<MatrixRun>& runs, const std::vector<fs::path>& dirs)
{
  Outcome o;
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i].exit_code != 0) o.fail("run " + std::to_string(i) + " exited " + std::to_string(runs[i].exit_code) + ": " + runs[i].err);
  if (!o.pass) return o;
  const auto first = tree(dirs[0]);
  const char* names[] = {"seed 0 rerun", "--jobs 8"};
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].out != runs[0].out) o.fail(std::string(names[i - 1]) + ": standard output differs");
    const auto other = tree(dirs[i]);
    if (other.size() != first.size()) o.fail(std::string(names[i - 1]) + ": different file sets");
    for (const auto& [rel, bytes] : first) {
      const auto it = other.find(rel);
      if (it == other.end() || it->second != bytes) o.fail(std::string(names[i - 1]) + ": " + rel + " differs");
    }
  }
  std::size_t bytes = 0;
  for (const auto& [rel, b] : first) bytes += b.size();
  o.detail = std::to_string(first.size()) + " files (" + std::to_string(bytes) + " bytes) identical across seed-0 rerun and --jobs 1 vs 8; runs took " +
             fixed(runs[0].seconds) + ", " + fixed(runs[1].seconds) + ", " + fixed(runs[2].seconds) + " s";
  return o;
}

Outcome round_trip(const std::vector<Circuit>& circuits, const fs::path& results)
{
  Outcome o;
  const auto t0 = Clock::now();
  std::size_t patterns = 0, bits = 0;
  for (const auto& c : circuits) {
    for (char letter : {'c', 'd'}) {
      const Experiment e = *parse_experiment(std::string(1, letter));
      const std::string text = read_file(results / c.name / std::string(1, letter) / "patterns.txt");
      const auto ops = parse_tester_program(text);
      const ReplayReport rep = replay_tester_program(c.netlist, ops, experiment_regime(e));
      patterns += rep.segments;
      bits += rep.compared_bits;
      if (!rep.pass)
        o.fail(c.name + " (" + letter + "): " + (rep.mismatches.empty() ? "mismatch" : rep.mismatches.front()));
      if (rep.segments != read_tester_patterns(c.netlist, text, experiment_regime(e)).size())
        o.fail(c.name + " (" + letter + "): replay skipped patterns");
    }
  }
  const double t = seconds_since(t0);
  if (t >= 120.0) o.fail("took " + fixed(t) + " s");
  o.detail = std::to_string(patterns) + " patterns, " + std::to_string(bits) +
             " expected bits reproduced through the gate-level filters, " + fixed(t, 2) + " s";
  return o;
}

Outcome oracle_agreement(const std::vector<Circuit>& circuits, const fs::path& results)
{
  Outcome o;
  std::size_t checked_circuits = 0, untestable = 0, detected = 0;
  const auto t0 = Clock::now();
  for (const auto& c : circuits) {
    if (oracle_bits(c.netlist) > kOracleBitLimit) continue;
    ++checked_circuits;
    for (Experiment e : kAllExperiments) {
      const std::string tag = c.name + " (" + experiment_letter(e) + ")";
      const fs::path dir = results / c.name / std::string(1, experiment_letter(e));
      const ClockingRegime regime = experiment_regime(e);
      const auto faults = enumerate_faults(c.netlist, regime_fault_model(regime));
      const auto status = fault_statuses(dir / "faults.txt");
      if (status.size() != faults.size()) {
        o.fail(tag + ": faults.txt has " + std::to_string(status.size()) + " lines");
        continue;
      }
      const PatternSet patterns = read_tester_patterns(c.netlist, read_file(dir / "patterns.txt"), regime);
      const auto sim = fault_simulate(c.netlist, patterns, faults);
      const auto truth = brute_force_classify(c.netlist, faults, regime);
      for (std::size_t i = 0; i < faults.size(); ++i) {
        const std::string who = tag + " " + site_name(c.netlist, faults[i].site) + " " + polarity_name(faults[i]);
        if (status[i] == "ATPG_UNTESTABLE") {
          ++untestable;
          if (truth[i] == Testability::Testable) o.fail(who + ": untestable but the oracle finds a test");
        } else if (status[i] == "DETECTED") {
          ++detected;
          if (sim[i].status != FaultStatus::Detected) o.fail(who + ": detection not confirmed by fault simulation");
        }
      }
    }
  }
  o.detail = std::to_string(checked_circuits) + " circuits within " + std::to_string(kOracleBitLimit) + " bits, " +
             std::to_string(untestable) + " untestable verdicts and " + std::to_string(detected) +
             " detections checked, " + fixed(seconds_since(t0), 1) + " s";
  return o;
}

Outcome trends(const std::vector<Circuit>& circuits, const fs::path& results)
{
  Outcome o;
  std::size_t aborted_total = 0;
  for (const auto& c : circuits) {
    std::map<char, ReportRow> row;
    for (Experiment e : kAllExperiments) {
      const char l = experiment_letter(e);
      const fs::path dir = results / c.name / std::string(1, l);
      row[l] = single_row(dir / "report.txt");
      const auto status = fault_statuses(dir / "faults.txt");
      const auto aborted = static_cast<std::size_t>(std::count(status.begin(), status.end(), "ABORTED"));
      aborted_total += aborted;
      if (aborted) o.fail(c.name + " (" + l + "): " + std::to_string(aborted) + " aborted faults");
    }
    auto tc = [&](char l) { return row[l].tc_hundredths; };
    auto show = [&](char l) { return std::string("TC(") + l + ")=" + format_hundredths(tc(l)); };
    if (tc('c') > tc('b')) o.fail(c.name + ": " + show('c') + " > " + show('b'));
    if (tc('c') > tc('d')) o.fail(c.name + ": " + show('c') + " > " + show('d'));
    if (tc('e') > tc('b')) o.fail(c.name + ": " + show('e') + " > " + show('b'));
    if (row['b'].patterns <= row['a'].patterns)
      o.fail(c.name + ": transition patterns " + std::to_string(row['b'].patterns) + " <= stuck-at patterns " +
             std::to_string(row['a'].patterns));
    if ((c.name == "crossing_toy" || c.name == "two_domain_small") && tc('c') >= tc('d'))
      o.fail(c.name + ": " + show('c') + " not below " + show('d'));
  }
  o.detail = std::to_string(circuits.size()) + " circuits, " + std::to_string(aborted_total) +
             " aborted faults; TC(c)<=TC(b), TC(c)<=TC(d), TC(e)<=TC(b), patterns(b)>patterns(a), "
             "TC(c)<TC(d) on crossing_toy and two_domain_small";
  return o;
}

Outcome fault_count_identity(const std::vector<Circuit>& circuits, const fs::path& results)
{
  Outcome o;
  std::size_t total = 0;
  for (const auto& c : circuits) {
    const std::size_t sa = enumerate_faults(c.netlist, FaultModel::StuckAt).size();
    const std::size_t tr = enumerate_faults(c.netlist, FaultModel::Transition).size();
    const std::size_t sites = fault_sites(c.netlist).size();
    if (sa != tr || sa != 2 * sites)
      o.fail(c.name + ": stuck-at " + std::to_string(sa) + ", transition " + std::to_string(tr) + ", sites " +
             std::to_string(sites));
    const auto lines_a = fault_statuses(results / c.name / "a" / "faults.txt").size();
    const auto lines_b = fault_statuses(results / c.name / "b" / "faults.txt").size();
    if (lines_a != lines_b) o.fail(c.name + ": faults.txt of (a) and (b) differ in length");
    total += sa;
  }
  o.detail = "|stuck-at| = |transition| = 2 x sites on " + std::to_string(circuits.size()) + " circuits (" +
             std::to_string(total) + " faults each)";
  return o;
}

Outcome report_formatting()
{
  Outcome o;
  const std::vector<ReportRow> table = {
      {"(a)", 9868, 6464, std::nullopt},  {"(b)", 9496, 29147, std::nullopt}, {"(c)", 8738, 68484, std::nullopt},
      {"(d)", 8799, 69785, std::nullopt}, {"(e)", 8838, 58351, std::nullopt},
  };
  const std::string expected = "Exp | TC [%] | # Pattern | Eff [%]\n"
                               "(a) |  98.68 |     6,464 |       -\n"
                               "(b) |  94.96 |    29,147 |       -\n"
                               "(c) |  87.38 |    68,484 |       -\n"
                               "(d) |  87.99 |    69,785 |       -\n"
                               "(e) |  88.38 |    58,351 |       -\n";
  const std::string got = emit_report(table);
  if (got != expected) o.fail("table text differs:\n" + got);
  for (const char* token : {"98.68", "94.96", "87.38", "87.99", "88.38", "6,464", "29,147", "68,484", "69,785", "58,351"})
    if (got.find(token) == std::string::npos) o.fail(std::string("missing ") + token);
  if (parse_report(got) != table) o.fail("table does not parse back");
  o.detail = "ten reference values reproduced, e.g. \"87.38\" and \"68,484\"";
  return o;
}

}  // namespace

int main(int argc, char** argv)
{
  const auto start = Clock::now();
  fs::path bench, work, unit_tests;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--bench") bench = argv[i + 1];
    else if (flag == "--work") work = argv[i + 1];
    else if (flag == "--unit-tests") unit_tests = argv[i + 1];
    else {
      std::cerr << "acceptance: unknown flag " << flag << '\n';
      return 1;
    }
  }
  if (bench.empty() || work.empty()) {
    std::cerr << "usage: acceptance --bench DIR --work DIR [--unit-tests PATH]\n";
    return 1;
  }

  try {
    std::vector<Circuit> circuits;
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(bench))
      if (e.path().extension() == ".net") paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) circuits.push_back({p.stem().string(), p, parse_netlist_file(p)});
    std::cout << "benchmark suite: " << circuits.size() << " circuits";
    for (const auto& c : circuits) std::cout << ", " << c.name << " (" << c.netlist.gates().size() << " gates)";
    std::cout << "\n";

    print(1, "CPF equivalence over 1,000 scenarios", cpf_equivalence());

    const std::vector<fs::path> dirs = {work / "seed0_jobs1", work / "seed0_jobs1_again", work / "seed0_jobs8"};
    std::vector<MatrixRun> runs;
    runs.push_back(run_matrix(bench, dirs[0], 1));
    runs.push_back(run_matrix(bench, dirs[1], 1));
    runs.push_back(run_matrix(bench, dirs[2], 8));
    const Outcome det = determinism(runs, dirs);
    if (runs[0].exit_code != 0) {
      std::cout << runs[0].err;
      print(2, "round trip of (c)/(d) patterns through the structural filters", det);
      print(3, "oracle agreement", det);
      print(4, "trends with zero aborted faults", det);
      print(5, "fault-count identity", det);
    } else {
      std::cout << runs[0].out;
      print(2, "round trip of (c)/(d) patterns through the structural filters", round_trip(circuits, dirs[0]));
      print(3, "oracle agreement", oracle_agreement(circuits, dirs[0]));
      print(4, "trends with zero aborted faults", trends(circuits, dirs[0]));
      print(5, "fault-count identity", fault_count_identity(circuits, dirs[0]));
    }
    print(6, "determinism of experiment --all", det);
    print(7, "report formatting", report_formatting());

    Outcome suite;
    double unit_seconds = 0;
    if (!unit_tests.empty()) {
      const auto t0 = Clock::now();
      const std::string cmd = "\"" + unit_tests.string() + "\" > \"" + (work / "unit_tests.log").string() + "\" 2>&1";
      const int rc = std::system(cmd.c_str());
      unit_seconds = seconds_since(t0);
      if (rc != 0) suite.fail("unit tests failed, see " + (work / "unit_tests.log").string());
    } else {
      suite.fail("no --unit-tests binary given, the suite time is incomplete");
    }
    const double total = seconds_since(start);
    if (total >= 300.0) suite.fail("took " + fixed(total) + " s");
    suite.detail = fixed(total) + " s for unit tests (" + fixed(unit_seconds) +
                   " s), the CPF run and three experiment matrices on " + std::to_string(circuits.size()) +
                   " circuits";
    print(8, "full suite under 5 minutes", suite);
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << '\n';
    return 1;
  }
  std::cout << (8 - failures) << "/8 criteria passed\n";
  return failures == 0 ? 0 : 1;
}
