#include "cli.hpp"

#include "idde/bias.hpp"
#include "idde/coincidence.hpp"
#include "idde/dataset.hpp"
#include "idde/serialize.hpp"
#include "idde/service.hpp"

#include "../support/oracle.hpp"

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

using namespace idde;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Scratch directory removed at scope exit.
struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("idde-cli-" + std::to_string(::getpid()) + "-" +
            std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string worked_example_csv(const TempDir& tmp) {
  const auto path = tmp.file("example.csv");
  write_file(path, "92,46,138\n4,2,7\n48,24,72\n26,13,40\n41,21,62\n");
  return path;
}

} // namespace

TEST_CASE("generate") {
  TempDir tmp;
  SUBCASE("hypercube") {
    const auto r = run({"generate", "hypercube", "--d", "10", "--D", "10", "--n", "1000", "--seed", "7", "-o",
                        tmp.file("cube.csv")});
    CHECK(r.code == cli::kOk);
    const auto ds = load_csv_file(tmp.file("cube.csv"));
    CHECK(ds.size() == 1000);
    CHECK(ds.dimension() == 10);
    CHECK(ds == gen_hypercube(1000, 10, 10, 7));
  }
  SUBCASE("circle") {
    CHECK(run({"generate", "circle", "--n", "3000", "--seed", "1", "-o", tmp.file("c.csv")}).code == cli::kOk);
    const auto ds = load_csv_file(tmp.file("c.csv"));
    CHECK(ds.size() == 3000);
    CHECK(ds.dimension() == 3);
  }
  SUBCASE("segment with the default direction") {
    const auto r = run({"generate", "segment", "--n", "5", "--noise", "5", "--seed", "1"});
    CHECK(r.code == cli::kOk);
    std::istringstream in(r.out);
    const auto ds = load_csv(in);
    CHECK(ds.size() == 5);
    CHECK(ds.dimension() == 3);
  }
  SUBCASE("seed is mandatory") {
    const auto r = run({"generate", "circle", "--n", "10"});
    CHECK(r.code == cli::kUsage);
    CHECK(r.err.find("seed") != std::string::npos);
  }
  SUBCASE("bad arguments") {
    CHECK(run({"generate", "torus", "--n", "10", "--seed", "1"}).code == cli::kUsage);
    CHECK(run({"generate", "hypercube", "--n", "10", "--d", "5", "--D", "3", "--seed", "1"}).code == cli::kUsage);
    CHECK(run({"generate", "segment", "--n", "10", "--direction", "1,x", "--seed", "1"}).code == cli::kUsage);
  }
}

TEST_CASE("curve") {
  TempDir tmp;
  const auto input = worked_example_csv(tmp);
  SUBCASE("worked example as JSON") {
    const auto r = run({"curve", "--in", input});
    REQUIRE(r.code == cli::kOk);
    const auto j = json::parse(r.out);
    CHECK(j.at("n") == 5);
    CHECK(j.at("lr") == 10);
    CHECK(j.at("zero_pairs") == 0);
    const auto c = j.get<CorrelationCurve>();
    CHECK(c.points[3] == CurvePoint{std::log2(66.0), std::log2(0.4)});
  }
  SUBCASE("CSV and radii outputs") {
    const auto r = run({"curve", input, "--csv", "-o", tmp.file("curve.csv"), "--radii-out", tmp.file("r.csv")});
    REQUIRE(r.code == cli::kOk);
    CHECK(read_file(tmp.file("curve.csv")) == curve_csv(curve(pairwise_radii(oracle::worked_example()))));
    CHECK(read_file(tmp.file("r.csv")) == "r\n20\n44\n64\n66\n110\n130\n132\n152\n196\n262\n");
  }
  SUBCASE("identical rows are a data error") {
    write_file(tmp.file("dup.csv"), "1,2\n1,2\n");
    const auto r = run({"curve", "--in", tmp.file("dup.csv")});
    CHECK(r.code == cli::kData);
  }
  SUBCASE("windowed series gives 785 patterns") {
    std::ostringstream series;
    series << "t\n";
    for (int i = 0; i < 15706; ++i) series << (i * 7919 % 1000) * 0.01 << "\n";
    write_file(tmp.file("series.csv"), series.str());
    const auto r = run({"curve", "--in", tmp.file("series.csv"), "--header", "--window", "20", "--resample", "100"});
    REQUIRE(r.code == cli::kOk);
    const auto j = json::parse(r.out);
    CHECK(j.at("n") == 785);
    CHECK(j.at("points").size() == 100);
  }
  SUBCASE("pair budget and sampling") {
    run({"generate", "hypercube", "--n", "100", "--d", "2", "--seed", "1", "-o", tmp.file("h.csv")});
    CHECK(run({"curve", tmp.file("h.csv"), "--pair-budget", "100"}).code == cli::kData);
    CHECK(run({"curve", tmp.file("h.csv"), "--pair-budget", "100", "--sample-size", "500"}).code == cli::kUsage);
    const auto r = run({"curve", tmp.file("h.csv"), "--pair-budget", "100", "--sample-size", "500", "--seed", "4"});
    REQUIRE(r.code == cli::kOk);
    CHECK(json::parse(r.out).at("lr") == 500);
  }
  SUBCASE("errors map to exit codes") {
    CHECK(run({"curve", "--in", tmp.file("missing.csv")}).code == cli::kIo);
    write_file(tmp.file("ragged.csv"), "1,2\n3\n");
    const auto ragged = run({"curve", "--in", tmp.file("ragged.csv")});
    CHECK(ragged.code == cli::kData);
    CHECK(ragged.err.find("row 2") != std::string::npos);
    CHECK(run({"curve", input, "-o", "/nonexistent/dir/out.json"}).code == cli::kIo);
    CHECK(run({"curve", input, "--delimiter", ";;"}).code == cli::kUsage);
  }
}

TEST_CASE("fit") {
  TempDir tmp;
  SUBCASE("exact synthetic line is echoed") {
    write_file(tmp.file("line.csv"),
               "# n=100\n# lr=4950\nlog2_r,log2_C\n-4,-7.33\n-3,-5.33\n-2,-3.33\n-1,-1.33\n");
    const auto r = run({"fit", tmp.file("line.csv"), "--range=-4:-1"});
    REQUIRE(r.code == cli::kOk);
    const auto fit = json::parse(r.out).at("fits")[0];
    CHECK(fit.at("d_hat").get<double>() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.at("h_hat").get<double>() == doctest::Approx(-0.67).epsilon(1e-12));
  }
  SUBCASE("worked example with a slope override and candidates") {
    const auto input = worked_example_csv(tmp);
    REQUIRE(run({"curve", input, "-o", tmp.file("c.json")}).code == cli::kOk);
    const auto r = run({"fit", "--curve", tmp.file("c.json"), "--range", "6.02:7.03", "--d-override", "1",
                        "--candidates", "1,2,3"});
    REQUIRE(r.code == cli::kOk);
    const auto report = json::parse(r.out);
    CHECK(report.at("dataset").at("n") == 5);
    const auto fit = report.at("fits")[0];
    CHECK(fit.at("h_hat").get<double>() == doctest::Approx(7.6).epsilon(0.05 / 7.6));
    CHECK(fit.at("candidates").size() == 3);
  }
  SUBCASE("10-D hypercube: fine range, then compensation") {
    run({"generate", "hypercube", "--n", "1000", "--d", "10", "--seed", "7", "-o", tmp.file("h.csv")});
    REQUIRE(run({"curve", tmp.file("h.csv"), "--resample", "500", "-o", tmp.file("h.json")}).code == cli::kOk);
    const auto scan = run({"scan", tmp.file("h.json"), "--width", "0.25", "--stride", "0.0625", "--min-windows", "1"});
    REQUIRE(scan.code == cli::kOk);
    const auto fine = json::parse(scan.out).at("fine_plateau");
    REQUIRE(fine.is_object());
    std::ostringstream range;
    range << "--range=" << fine.at("range")[0].get<double>() << ":" << fine.at("range")[1].get<double>();
    const auto r = run({"fit", tmp.file("h.json"), range.str(), "--model-scale", "--compensate"});
    REQUIRE(r.code == cli::kOk);
    const auto report = json::parse(r.out);
    const auto fit = report.at("fits")[0];
    CHECK(fit.at("d_hat").get<double>() == doctest::Approx(8.0).epsilon(0.5 / 8));
    CHECK(fit.at("h_hat").get<double>() == doctest::Approx(4.0).epsilon(1.0 / 4));
    const auto comp = report.at("compensations")[0];
    CHECK(comp.at("fit") == 0);
    CHECK(comp.at("d_bar") == 10.0);
    CHECK(std::abs(comp.at("h_bar").get<double>()) <= 1.0);
    CHECK(comp.at("table").at("rows").size() == 5);
    CHECK(report.at("requirements")[0].at("d") == 10.0);
  }
  SUBCASE("17-D hypercube at N=6990") {
    run({"generate", "hypercube", "--n", "6990", "--d", "17", "--seed", "1", "-o", tmp.file("h.csv")});
    REQUIRE(run({"curve", tmp.file("h.csv"), "--resample", "500", "-o", tmp.file("h.json")}).code == cli::kOk);
    const auto scan = json::parse(run({"scan", tmp.file("h.json"), "--width", "0.25", "--stride", "0.0625",
                                       "--min-windows", "1"})
                                      .out);
    std::ostringstream range;
    range << "--range=" << scan.at("fine_plateau").at("range")[0].get<double>() << ":"
          << scan.at("fine_plateau").at("range")[1].get<double>();
    const auto report =
        json::parse(run({"fit", tmp.file("h.json"), range.str(), "--model-scale", "--compensate"}).out);
    CHECK(report.at("fits")[0].at("d_hat").get<double>() == doctest::Approx(13.0).epsilon(0.5 / 13));
    CHECK(report.at("fits")[0].at("h_hat").get<double>() == doctest::Approx(6.8).epsilon(0.5 / 6.8));
    CHECK(report.at("compensations")[0].at("d_bar") == 17.0);
  }
  SUBCASE("errors") {
    const auto input = worked_example_csv(tmp);
    run({"curve", input, "-o", tmp.file("c.json")});
    CHECK(run({"fit", tmp.file("c.json"), "--range", "7:6"}).code == cli::kUsage);
    CHECK(run({"fit", tmp.file("c.json"), "--range", "abc"}).code == cli::kUsage);
    CHECK(run({"fit", tmp.file("c.json"), "--range", "20:21"}).code == cli::kData);
    CHECK(run({"fit", tmp.file("nope.json"), "--range", "1:2"}).code == cli::kIo);
    CHECK(run({"fit", tmp.file("c.json")}).code == cli::kUsage);
    CHECK(run({"fit", tmp.file("c.json"), "--range", "6:7", "--mode", "fuzzy"}).code == cli::kUsage);
  }
}

TEST_CASE("bias-table and compensate") {
  const auto table = run({"bias-table", "--n", "1000", "--dmin", "8", "--dmax", "12"});
  REQUIRE(table.code == cli::kOk);
  const auto j = json::parse(table.out);
  CHECK(j == json(bias::bias_table(1000, 8, 12)));

  const auto csv = run({"bias-table", "--n", "1000", "--dmin", "10", "--dmax", "11", "--csv"});
  CHECK(csv.out.rfind("d,d0\n10,7.99", 0) == 0);
  CHECK(run({"bias-table", "--n", "1000", "--dmin", "5", "--dmax", "2"}).code == cli::kUsage);

  const auto comp = run({"compensate", "--n", "6990", "--d-hat", "13.1", "--h-hat", "134"});
  REQUIRE(comp.code == cli::kOk);
  const auto c = json::parse(comp.out);
  CHECK(c.at("d_bar") == 17.0);
  CHECK(c.at("h_bar").get<double>() == doctest::Approx(127.6).epsilon(0.2 / 127.6));

  const auto cont = json::parse(run({"compensate", "--n", "785", "--d-hat", "10.7", "--h-hat", "76.5", "--mode",
                                     "continuous"})
                                    .out);
  CHECK(cont.at("d_bar").get<double>() == doctest::Approx(14.0).epsilon(0.05 / 14));
  CHECK(run({"compensate", "--n", "785", "--d-hat", "900", "--h-hat", "1"}).code == cli::kData);
}

TEST_CASE("usage, help and version") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  const auto help = run({"--help"});
  CHECK(help.code == cli::kOk);
  CHECK(help.out.find("curve") != std::string::npos);
  CHECK(run({"--version"}).code == cli::kOk);
  CHECK(run({"bias-table"}).code == cli::kUsage);
}

TEST_CASE("serve rejects bad bind addresses") {
  CHECK(run({"serve", "--bind", "nonsense"}).code == cli::kUsage);
  CHECK(run({"serve", "--bind", "203.0.113.254:8080"}).code == cli::kIo);
}

TEST_CASE("CLI and service curve CSVs are byte-identical") {
  TempDir tmp;
  run({"generate", "circle", "--n", "400", "--seed", "3", "-o", tmp.file("c.csv")});
  const auto csv = read_file(tmp.file("c.csv"));

  service::Server server;
  const int port = server.bind("127.0.0.1", 0);
  std::jthread thread([&] { server.listen(); });
  for (int i = 0; i < 500 && !server.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(2));
  REQUIRE(server.running());

  httplib::Client client("127.0.0.1", port);
  const auto up = client.Post("/datasets", csv, "text/csv");
  REQUIRE(up);
  REQUIRE(up->status == 201);
  const auto id = json::parse(up->body).at("id").get<std::string>();

  for (const std::string points : {"0", "50", "2000"}) {
    std::vector<std::string> args = {"curve", tmp.file("c.csv"), "--csv"};
    if (points != "0") {
      args.push_back("--resample");
      args.push_back(points);
    }
    const auto cli_out = run(args);
    REQUIRE(cli_out.code == cli::kOk);
    const auto served = client.Get("/datasets/" + id + "/curve?format=csv&points=" + points);
    REQUIRE(served);
    CHECK(served->body == cli_out.out);
  }

  // The fit endpoint matches the CLI on the same curve.
  run({"curve", tmp.file("c.csv"), "--resample", "500", "-o", tmp.file("c.json")});
  const auto cli_fit = json::parse(run({"fit", tmp.file("c.json"), "--range=-5:-2"}).out).at("fits")[0];
  const auto svc_fit = client.Post("/datasets/" + id + "/fit", json{{"range", {-5, -2}}, {"points", 500}}.dump(),
                                   "application/json");
  CHECK(json::parse(svc_fit->body) == cli_fit);
  server.stop();
}
