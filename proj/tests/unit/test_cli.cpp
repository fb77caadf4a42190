#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <unistd.h>
#include <sstream>

#include "cli.hpp"
#include "hazardforge/csv_io.hpp"

namespace fs = std::filesystem;
using hazardforge::cli::run;
using Json = nlohmann::ordered_json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class Workspace {
 public:
  Workspace() {
    static int counter = 0;
    dir_ = fs::temp_directory_path() /
           ("hazardforge-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }
  static std::string read(const std::string& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
  }

 private:
  fs::path dir_;
};

const char* kToy =
    "time,status,group,stratum,age\n"
    "0.3,1,0,0,1.2\n0.6,0,1,0,0.4\n0.8,1,0,1,-0.3\n1.1,1,1,1,0.9\n1.5,0,0,0,-1.1\n"
    "1.9,1,1,0,0.2\n2.4,1,0,1,0.5\n2.8,0,1,1,-0.6\n3.2,1,0,0,1.4\n3.7,1,1,1,-0.2\n";

}  // namespace

TEST_CASE("usage errors exit 64 with a parsable reason") {
  CHECK(call({}).code == 64);
  CHECK(call({"frobnicate"}).code == 64);
  const auto r = call({"km", "--conf-level"});
  CHECK(r.code == 64);
  CHECK(r.err.rfind("error kind=usage exit=64 message=", 0) == 0);
  Workspace w;
  const auto toy = w.write("toy.csv", kToy);
  CHECK(call({"km", "--input", toy, "--band", "hw", "--band-interval", "0.5", "3.0"}).code == 64);
  CHECK(call({"cox", "--input", toy, "--format", "csv"}).code == 64);
  CHECK(call({"km", "--input", toy, "--transform", "probit"}).code == 64);
  CHECK(call({"beran", "--input", toy, "--bandwidth", "1"}).code == 64);
  CHECK(call({"simulate", "--n", "10"}).code == 64);
}

TEST_CASE("validation errors exit 2") {
  Workspace w;
  const auto bad = w.write("bad.csv", "time,status\n1.0,2\n");
  const auto r = call({"km", "--input", bad});
  CHECK(r.code == 2);
  CHECK(r.err.rfind("error kind=", 0) == 0);
  CHECK(r.err.find("exit=2") != std::string::npos);
  // a nonexistent path is rejected while parsing arguments
  CHECK(call({"km", "--input", w.path("missing.csv")}).code == 64);
  const auto toy = w.write("toy.csv", kToy);
  CHECK(call({"excess", "--input", toy}).code == 2);
}

TEST_CASE("km with a Hall-Wellner band") {
  Workspace w;
  const auto toy = w.write("toy.csv", kToy);
  const auto r = call({"km", "--input", toy, "--conf-level", "0.95", "--band", "hw",
                       "--band-interval", "0.5", "3.0", "--mc-reps", "4000", "--seed", "7"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j.at("kind") == "survival");
  CHECK(j.at("estimate").size() == 7);
  CHECK(j.contains("variance"));
  CHECK(j.at("band").at("critical_value").get<double>() > 0.0);
  // the band is Monte Carlo; the same seed reproduces it
  CHECK(call({"km", "--input", toy, "--conf-level", "0.95", "--band", "hw", "--band-interval",
              "0.5", "3.0", "--mc-reps", "4000", "--seed", "7"})
            .out == r.out);

  const auto csv = call({"na", "--input", toy, "--format", "csv"});
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("time,", 0) == 0);
}

TEST_CASE("logrank with strata and weights") {
  Workspace w;
  const auto toy = w.write("toy.csv", kToy);
  const auto r = call({"logrank", "--input", toy, "--weight", "fh", "--rho", "1", "--strata-col",
                       "stratum"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j.at("df") == 1);
  CHECK(j.at("rho") == 1.0);
  const double p = j.at("p_value").get<double>();
  CHECK((p >= 0.0 && p <= 1.0));
}

TEST_CASE("simulate, fit and replay") {
  Workspace w;
  const auto sim = w.path("sim.csv");
  REQUIRE(call({"simulate", "--n", "1000", "--event", "exp:1", "--censor", "exp:0.5", "--model",
                "cox", "--beta", "0.7", "--seed", "42", "--output", sim})
              .code == 0);
  std::ifstream in(sim);
  const auto sample = hazardforge::read_right_censored(in);
  CHECK(sample.size() == 1000);
  CHECK(sample.dim() == 1);

  const auto fit_out = w.path("fit.json");
  REQUIRE(call({"cox", "--input", sim, "--output", fit_out}).code == 0);
  const auto fit = Json::parse(Workspace::read(fit_out));
  CHECK(fit.at("converged") == true);
  CHECK(std::abs(fit.at("coefficients")[0].get<double>() - 0.7) < 0.2);

  const auto manifest = fit_out + ".manifest.json";
  REQUIRE(fs::exists(manifest));
  const auto m = Json::parse(Workspace::read(manifest));
  CHECK(m.at("subcommand") == "cox");
  CHECK(m.at("exit_code") == 0);

  const auto again = w.path("again.json");
  const auto replay = call({"replay", "--manifest", manifest, "--output", again});
  CHECK(replay.code == 0);
  CHECK(Workspace::read(again) == Workspace::read(fit_out));

  // replaying the simulation itself reproduces the CSV byte for byte
  const auto sim_again = w.path("sim2.csv");
  CHECK(call({"replay", "--manifest", sim + ".manifest.json", "--output", sim_again}).code == 0);
  CHECK(Workspace::read(sim_again) == Workspace::read(sim));

  auto tampered = m;
  tampered["checksums"]["output"] = "0000000000000000";
  const auto bad_manifest = w.write("tampered.json", tampered.dump(2));
  CHECK(call({"replay", "--manifest", bad_manifest}).code == 3);

  std::ofstream(sim, std::ios::app) << "9,1,0,0\n";
  CHECK(call({"replay", "--manifest", manifest}).code == 2);
}

TEST_CASE("non-convergence still writes the result and exits 3") {
  Workspace w;
  const auto sim = w.path("sim.csv");
  REQUIRE(call({"simulate", "--n", "200", "--beta", "0.5", "--seed", "3", "--output", sim}).code ==
          0);
  const auto out = w.path("cox.json");
  const auto r = call({"cox", "--input", sim, "--max-iter", "1", "--output", out});
  CHECK(r.code == 3);
  CHECK(r.err.find("exit=3") != std::string::npos);
  CHECK(Json::parse(Workspace::read(out)).at("converged") == false);
}

TEST_CASE("remaining subcommands produce JSON") {
  Workspace w;
  const auto toy = w.write("toy.csv", kToy);
  const auto cr = w.write("cr.csv",
                          "time,status,cause\n0.5,1,1\n0.7,1,2\n1.0,0,0\n1.4,1,1\n2.0,1,2\n2.5,0,0\n");
  const auto ic = w.write("ic.csv", "left,right\n0,1\n0.5,2\n1.5,inf\n2,3\n0,0.8\n");
  const auto bv = w.write("bv.csv", "t1,d1,t2,d2\n1,1,2,1\n2,1,1,1\n3,0,3,1\n1.5,1,2.5,0\n");
  const auto ms = w.write("ms.csv", "id,time,from,to\n1,0.5,0,1\n1,1.0,1,2\n2,0.7,0,2\n3,1.2,0,-1\n");
  const auto pop = w.write("pop.csv", "time,status,mu\n0.5,1,0.1\n1.0,0,0.2\n1.5,1,0.1\n2.0,1,0.3\n");
  const std::vector<std::vector<std::string>> runs = {
      {"aj", "--input", ms},
      {"cif", "--input", cr},
      {"excess", "--input", pop},
      {"dabrowska", "--input", bv},
      {"turnbull", "--input", ic},
      {"aalen", "--input", toy},
      {"bj", "--input", toy},
      {"beran", "--input", toy, "--z0", "0", "--bandwidth", "2"},
      {"parametric", "--input", toy, "--family", "weibull"},
      {"residuals", "--input", toy, "--strata-col", "stratum"},
      {"km", "--input", toy, "--bandwidth", "1.0", "--quantile", "0.5"},
  };
  for (const auto& args : runs) {
    CAPTURE(args[0]);
    const auto r = call(args);
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    CHECK(Json::accept(r.out));
  }
  const auto csv = call({"residuals", "--input", toy, "--format", "csv"});
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("time,status,martingale,deviance,cox_snell\n", 0) == 0);

  const auto markov = call({"simulate", "--n", "20", "--rates", "-1,1;0,0", "--horizon", "2",
                            "--seed", "1"});
  CHECK(markov.code == 0);
  CHECK(markov.out.rfind("id,time,from,to\n", 0) == 0);
}
