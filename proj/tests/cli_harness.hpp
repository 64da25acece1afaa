#pragma once

// Runs the racint binary and compares output trees.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <string>
#include <vector>

namespace cli {

namespace fs = std::filesystem;

inline fs::path work_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("racint_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Exit status of `racint <args>` with stdout/stderr discarded.
inline int run(const std::string& args) {
  const std::string cmd = std::string(RACINT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Relative paths that differ in content or exist on one side only.
inline std::vector<std::string> diff_trees(const fs::path& a, const fs::path& b) {
  std::set<std::string> names;
  for (const fs::path& root : {a, b}) {
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) names.insert(fs::relative(e.path(), root).string());
    }
  }
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (!fs::exists(a / n) || !fs::exists(b / n) || read_file(a / n) != read_file(b / n)) {
      out.push_back(n);
    }
  }
  return out;
}

inline std::size_t file_count(const fs::path& root) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(root)) n += e.is_regular_file();
  return n;
}


// Runs one invocation of every subcommand, writing into `out`. Inputs that the
// commands read come from `in` (prepared once, so the provenance of every
// output names the same files). Returns the commands that exited non-zero.
inline std::vector<std::string> run_every_command(const fs::path& in, const fs::path& out) {
  const std::string o = "--out " + out.string() + " ";
  const std::string shoes = (in / "shoes.csv").string();
  const std::string raw = (in / "raw.json").string();
  const std::vector<std::string> cmds{
      o + "generate --shoes 12 --avg-racs 20 --grid 40x30 --seed 5 --output gen.csv",
      o + "generate --shoes 5 --grid 40x30 --coverage 1 --coverage-spread 0 --a-law constant --seed 2 "
          "--output gen_full.json",
      o + "fit " + shoes + " --grid 40x30 --partition expert --method all --ci 0.95 --prefix region",
      o + "fit " + shoes + " --grid 40x30 --partition expert --method re --prior lognormal --prefix logn",
      o + "fit " + shoes + " --grid 40x30 --partition pixel --method all --knots-x 1 --knots-y 2 "
          "--subsample cc_within_prop_cases --controls 40 --ci 0.9 --smooth 2 --binarize --seed 3 "
          "--prefix pixel",
      o + "subsample " + shoes + " --grid 40x30 --scheme cc_pooled --controls 10 --seed 9",
      o + "stats " + shoes + " --grid 40x30",
      o + "normalize " + raw + " --grid 40x30 --output norm.csv",
      o + "simulate --builtin scenario_01_equal_lambda --reps 2 --seed 1",
      o + "scenarios",
  };
  std::vector<std::string> failed;
  for (const auto& c : cmds) {
    if (run(c) != 0) failed.push_back(c);
  }
  return failed;
}

// Input files for run_every_command.
inline void prepare_inputs(const fs::path& in) {
  run("--out " + in.string() + " generate --shoes 25 --avg-racs 30 --grid 40x30 --seed 11 --output shoes.csv");
  std::ofstream raw(in / "raw.json");
  raw << R"([{"print_id":"left","landmark_top":[20,2],"landmark_bottom":[20,38],)"
      << R"("rac_points":[[18.5,10.5],[21.5,30.5]],"is_right_shoe":false,)"
      << R"("mask":{"height":40,"width":40,"rle":[80,1200]}},)"
      << R"({"print_id":"right","landmark_top":[5,5],"landmark_bottom":[30,30],)"
      << R"("rac_points":[[17.5,17.5]],"is_right_shoe":true,)"
      << R"("mask":{"height":40,"width":40,"rle":[0,1600]}}])";
}

}  // namespace cli
