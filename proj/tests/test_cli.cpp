// End-to-end checks of the command-line tool: spawns the binary passed as
// argv[1] and inspects exit codes and output files.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    ++failures;
    std::cerr << "FAILED: " << what << '\n';
  }
}

std::string g_binary;
fs::path g_dir;

std::string path_of(const std::string& name) {
  return (g_dir / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

int run(const std::string& args, const std::string& err_file = "") {
  std::string command = g_binary + " " + args;
  if (!err_file.empty()) command += " 2>" + err_file;
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string poisson_csv(int count, double side) {
  std::string csv = "x,y\n";
  double x = 0.135, y = 0.612;
  for (int i = 0; i < count; ++i) {
    x = std::fmod(x + 0.754875, 1.0);
    y = std::fmod(y + 0.569840, 1.0);
    csv += std::to_string(side * x) + "," + std::to_string(side * y) + "\n";
  }
  return csv;
}

void test_fit_poisson() {
  write_text(path_of("poisson.toml"),
             "[model]\nfamily = \"poisson\"\n"
             "[data]\nwindow = [0.0, 10.0, 0.0, 10.0]\n"
             "[fit]\ncell = 1.0\ngrid = [64, 64]\n");
  write_text(path_of("pts.csv"), poisson_csv(100, 10.0));
  const int code = run("fit --model " + path_of("poisson.toml") + " --data " +
                       path_of("pts.csv") + " --out " + path_of("fit.json"));
  expect(code == 0, "poisson fit exits 0");
  const json out = json::parse(read_text(path_of("fit.json")));
  expect(std::abs(out["theta_hat"][0].get<double>()) <= 1e-8,
         "poisson theta_hat is -log(n/A) = 0");
  expect(out["solver"]["converged"].get<bool>(), "poisson fit converged");
  expect(out.contains("config"), "fit output echoes the config");
}

void test_missing_data_file() {
  const int code = run("fit --model " + path_of("poisson.toml") +
                           " --data " + path_of("nowhere.csv") + " --out " +
                           path_of("x.json"),
                       path_of("err.txt"));
  expect(code == 1, "missing data file exits 1");
  expect(read_text(path_of("err.txt")).find("nowhere.csv") !=
             std::string::npos,
         "error message names the missing path");
}

void test_infeasible_data() {
  write_text(path_of("hard.toml"),
             "[model]\nfamily = \"multi_strauss\"\nmarks = 1\n"
             "ranges_1_1 = [0.3, 1.0]\n"
             "[data]\nwindow = [0.0, 6.0, 0.0, 6.0]\n"
             "[fit]\ngrid = [32, 32]\n");
  write_text(path_of("close.csv"), "x,y\n3.0,3.0\n3.1,3.0\n");
  const int code = run("fit --model " + path_of("hard.toml") + " --data " +
                           path_of("close.csv") + " --out " +
                           path_of("hard.json"),
                       path_of("err2.txt"));
  expect(code == 1, "hard-core violation exits 1");
  expect(read_text(path_of("err2.txt")).find("hard core") !=
             std::string::npos,
         "error message mentions the hard core");
}

void test_nonconvergence_exit_code() {
  write_text(path_of("empty.csv"), "x,y\n");
  const int code = run("fit --model " + path_of("poisson.toml") + " --data " +
                       path_of("empty.csv") + " --out " +
                       path_of("empty_fit.json"));
  expect(code == 2, "empty-pattern fit exits 2");
  const json out = json::parse(read_text(path_of("empty_fit.json")));
  expect(!out["solver"]["converged"].get<bool>(),
         "non-converged flag is written");
}

void test_simulate_determinism() {
  write_text(path_of("sim.toml"),
             "[model]\nfamily = \"multi_strauss\"\nmarks = 1\n"
             "ranges_1_1 = [0.0, 0.8]\ntheta = [-0.2, 0.5]\n"
             "[simulate]\nwindow = [0.0, 6.0, 0.0, 6.0]\n"
             "steps = 20000\nburn_in = 5000\nseed = 11\n");
  const std::string base = "simulate --model " + path_of("sim.toml");
  expect(run(base + " --out " + path_of("sim1.csv") + " --manifest " +
             path_of("sim1.json")) == 0,
         "simulate exits 0");
  expect(run(base + " --out " + path_of("sim2.csv")) == 0,
         "second simulate exits 0");
  expect(read_text(path_of("sim1.csv")) == read_text(path_of("sim2.csv")),
         "same config gives byte-identical CSV");
  const json manifest = json::parse(read_text(path_of("sim1.json")));
  expect(manifest["seed"] == 11, "manifest echoes the seed");

  expect(run(base + " --steps 0 --out " + path_of("sim0.csv")) == 0,
         "steps=0 exits 0");
  expect(read_text(path_of("sim0.csv")) == "x,y\n",
         "steps=0 yields a header-only pattern");

  expect(run(base + " --seed 12 --out " + path_of("sim3.csv")) == 0,
         "seed flag accepted");
  expect(read_text(path_of("sim3.csv")) != read_text(path_of("sim1.csv")),
         "different seed changes the output");
}

void test_stats_triangle() {
  write_text(path_of("geyer.toml"),
             "[model]\nfamily = \"geyer_triplet\"\nR = 1.0\n"
             "[data]\nwindow = [0.0, 8.0, 0.0, 8.0]\n");
  write_text(path_of("triangle.csv"),
             "x,y\n3.75,4.0\n4.25,4.0\n4.0,4.433012701892219\n");
  expect(run("stats --model " + path_of("geyer.toml") + " --data " +
             path_of("triangle.csv") + " --out " + path_of("stats.json") +
             " --per-point --plot " + path_of("triangle.svg")) == 0,
         "stats exits 0");
  const json out = json::parse(read_text(path_of("stats.json")));
  expect(out["global"][0] == 3 && out["global"][1] == 3 &&
             out["global"][2] == 1,
         "triangle statistics are (3, 3, 1)");
  expect(read_text(path_of("triangle.svg")).find("<svg") != std::string::npos,
         "plot flag writes an SVG");
}

void test_fit_then_gnz() {
  write_text(path_of("strauss.toml"),
             "[model]\nfamily = \"multi_strauss\"\nmarks = 1\n"
             "ranges_1_1 = [0.0, 1.0]\n"
             "[data]\nwindow = [0.0, 8.0, 0.0, 8.0]\n"
             "[fit]\ngrid = [128, 128]\ndvee = 1.0\ncell = 1.0\n");
  write_text(path_of("spts.csv"), poisson_csv(60, 8.0));
  expect(run("fit --model " + path_of("strauss.toml") + " --data " +
             path_of("spts.csv") + " --out " + path_of("sfit.json")) == 0,
         "strauss fit exits 0");
  const json fit = json::parse(read_text(path_of("sfit.json")));
  std::string theta_args = " --theta";
  for (const auto& component : fit["theta_hat"]) {
    theta_args += " " + format_full(component.get<double>());
  }
  expect(run("gnz --model " + path_of("strauss.toml") + " --data " +
             path_of("spts.csv") + " --out " + path_of("gnz.json") +
             theta_args) == 0,
         "gnz exits 0");
  const json gnz = json::parse(read_text(path_of("gnz.json")));
  const double area = 36.0;  // 8 - 2 dvee on each side
  for (const auto& r : gnz["statistic_residuals"]) {
    expect(std::abs(r.get<double>()) <= 10.0 * 1e-8 * area,
           "per-statistic residual below 10x solver tolerance");
  }

  expect(run("vcov --model " + path_of("strauss.toml") + " --data " +
             path_of("spts.csv") + " --out " + path_of("svcov.json") +
             theta_args) == 0,
         "vcov exits 0");
  const json vcov = json::parse(read_text(path_of("svcov.json")));
  expect(vcov["vcov"].size() == 2, "vcov matrix has model dimension");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: test_cli <gibbsfit-binary>\n";
    return 2;
  }
  g_binary = argv[1];
  g_dir = fs::temp_directory_path() /
          ("gibbsfit_cli_" + std::to_string(::getpid()));
  fs::create_directories(g_dir);

  test_fit_poisson();
  test_missing_data_file();
  test_infeasible_data();
  test_nonconvergence_exit_code();
  test_simulate_determinism();
  test_stats_triangle();
  test_fit_then_gnz();

  fs::remove_all(g_dir);
  if (failures == 0) {
    std::cout << "test_cli: all checks passed\n";
    return 0;
  }
  std::cerr << "test_cli: " << failures << " check(s) failed\n";
  return 1;
}
