#include "helpers.hpp"

#include "ifmix/cli.hpp"
#include "ifmix/gnn.hpp"
#include "ifmix/tudataset.hpp"
#include "ifmix/trainer.hpp"

#include <doctest.h>

#include <fstream>
#include <regex>
#include <sstream>

using namespace ifmix;
using testing::TempDir;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string mutag_dir() { return (testing::data_dir() / "MUTAG").string(); }

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// Minimal structural XML check: balanced, properly nested tags.
bool well_formed_xml(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t pos = 0;
  while ((pos = text.find('<', pos)) != std::string::npos) {
    const auto end = text.find('>', pos);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag.back() == '/') continue;
    if (tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else {
      stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
    }
  }
  return stack.empty();
}

} // namespace

TEST_CASE("usage errors") {
  auto r = run({"frobnicate"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("frobnicate") != std::string::npos);
  CHECK(r.err.find("stats") != std::string::npos);

  CHECK(run({}).code == kExitUsage);
  CHECK(run({"stats"}).code == kExitUsage);
  CHECK(run({"stats", "a", "b", "--no-such-flag"}).code == kExitUsage);
  CHECK(run({"sweep", "--axis", "width"}).code == kExitUsage);
}

TEST_CASE("help on every subcommand") {
  CHECK(run({"--help"}).code == kExitOk);
  for (const char* sub : {"stats", "mix", "recover", "audit", "check-independence", "train", "cv", "sweep", "plot"}) {
    CAPTURE(sub);
    auto r = run({sub, "--help"});
    CHECK(r.code == kExitOk);
    const std::string text = r.out + r.err;
    CHECK(text.find(sub) != std::string::npos);
    CHECK(text.find("--help") != std::string::npos);
  }
  auto t = run({"train", "--help"});
  for (const char* flag : {"--data-dir", "--dataset", "--arch", "--layers", "--augment", "--alpha", "--beta", "--lr",
                           "--epochs", "--seed", "--out", "--shuffle-nodes"}) {
    CHECK((t.out + t.err).find(flag) != std::string::npos);
  }
}

TEST_CASE("domain errors exit 1 and name the input") {
  TempDir dir("cli_missing");
  auto r = run({"stats", dir.path.string(), "NOPE"});
  CHECK(r.code == kExitDomainError);
  CHECK(r.err.find("NOPE") != std::string::npos);
}

TEST_CASE("stats on a fixture") {
  TempDir dir("cli_fixture");
  std::ofstream(dir.path / "FIX_A.txt") << "1, 2\n2, 1\n";
  std::ofstream(dir.path / "FIX_graph_indicator.txt") << "1\n1\n";
  std::ofstream(dir.path / "FIX_graph_labels.txt") << "1\n";
  auto r = run({"stats", dir.path.string(), "FIX", "--json", (dir.path / "s.json").string()});
  CHECK(r.code == kExitOk);
  CHECK(std::regex_search(r.out, std::regex("graphs:\\s+1\\b")));
  CHECK(std::filesystem::exists(dir.path / "s.json"));
}

TEST_CASE("MUTAG commands" * doctest::skip(!testing::have_mutag())) {
  SUBCASE("stats") {
    auto r = run({"stats", mutag_dir(), "MUTAG"});
    CHECK(r.code == kExitOk);
    CHECK(std::regex_search(r.out, std::regex("graphs:\\s+188")));
    CHECK(std::regex_search(r.out, std::regex("classes:\\s+2")));
  }
  SUBCASE("check-independence") {
    auto r = run({"check-independence", mutag_dir(), "MUTAG"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("\"vocabulary_independent\": true") != std::string::npos);
  }
  SUBCASE("mix then recover") {
    TempDir out("cli_mix");
    for (int seed = 0; seed < 5; ++seed) {
      auto m = run({"mix", mutag_dir(), "MUTAG", "--seed", std::to_string(seed), "--alpha", "2", "--beta", "2", "--out",
                    out.path.string()});
      REQUIRE(m.code == kExitOk);
      auto r = run({"recover", out.path.string(), "MUTAG_mixed", "--verify"});
      CHECK(r.code == kExitOk);
      CHECK(r.out.find("\"verified\": true") != std::string::npos);
      // MUTAG's coefficient matrices are dependent, so the basis route must refuse.
      auto b = run({"recover", out.path.string(), "MUTAG_mixed", "--mode", "basis"});
      CHECK(b.code == kExitDomainError);
      CHECK(b.err.find("assumption violated") != std::string::npos);
    }
    auto fixed = run({"mix", mutag_dir(), "MUTAG", "--first", "3", "--second", "7", "--lambda", "0.5", "--out",
                      out.path.string(), "--out-name", "half"});
    REQUIRE(fixed.code == kExitOk);
    auto bad = run({"recover", out.path.string(), "half"});
    CHECK(bad.code == kExitDomainError);
    CHECK(bad.err.find("indistinguishable") != std::string::npos);
  }
  SUBCASE("mix is deterministic given the seed") {
    TempDir a("cli_det_a"), b("cli_det_b");
    run({"mix", mutag_dir(), "MUTAG", "--seed", "9", "--out", a.path.string()});
    run({"mix", mutag_dir(), "MUTAG", "--seed", "9", "--out", b.path.string()});
    CHECK(slurp(a.path / "MUTAG_mixed_node_attributes.txt") == slurp(b.path / "MUTAG_mixed_node_attributes.txt"));
  }
  SUBCASE("audit") {
    auto r = run({"audit", mutag_dir(), "MUTAG", "--trials", "100", "--strict"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("\"collisions\": 0") != std::string::npos);
    CHECK(r.out.find("\"recovery_failures\": 0") != std::string::npos);
  }
  SUBCASE("train writes re-readable outputs") {
    TempDir out("cli_train");
    auto r = run({"train", "--data-dir", mutag_dir(), "--dataset", "MUTAG", "--limit", "30", "--epochs", "3", "--layers",
                  "2", "--hidden", "8", "--out", out.path.string(), "--quiet"});
    REQUIRE(r.code == kExitOk);
    auto metrics = metrics_from_csv(slurp(out.path / "metrics.csv"));
    CHECK(metrics.size() == 3);
    ModelConfig c;
    ModelParams p;
    load_checkpoint((out.path / "checkpoint.json").string(), c, p);
    CHECK(c.layers == 2);
    CHECK(p.input_dim == 7);
    CHECK(std::filesystem::exists(out.path / "summary.json"));
  }
}

TEST_CASE("config documents") {
  TempDir dir("cli_cfg");
  std::ofstream(dir.path / "FIX_A.txt") << "1, 2\n3, 4\n5, 6\n7, 8\n";
  std::ofstream(dir.path / "FIX_graph_indicator.txt") << "1\n1\n2\n2\n3\n3\n4\n4\n";
  std::ofstream(dir.path / "FIX_graph_labels.txt") << "1\n2\n1\n2\n";
  const auto cfg = dir.path / "bad.json";
  std::ofstream(cfg) << R"({"dataset": {"dir": ")" << dir.path.string() << R"(", "name": "FIX"}, "train": {"bogus": 1}})";
  auto r = run({"cv", cfg.string()});
  CHECK(r.code != kExitOk);
  CHECK(r.err.find("bogus") != std::string::npos);

  const auto good = dir.path / "good.json";
  std::ofstream(good) << R"({"dataset": {"dir": ")" << dir.path.string()
                      << R"(", "name": "FIX"}, "model": {"arch": "gcn", "layers": 1, "hidden": 4},
                           "train": {"epochs": 2, "folds": 2, "runs": 1}, "output": {"dir": ")"
                      << (dir.path / "out").string() << R"("}})";
  auto ok = run({"cv", good.string(), "--quiet"});
  CHECK(ok.code == kExitOk);
  CHECK(metrics_from_csv(slurp(dir.path / "out" / "metrics.csv")).size() == 2);

  // Flags override the document.
  auto over = run({"cv", good.string(), "--epochs", "3", "--quiet"});
  CHECK(over.code == kExitOk);
  CHECK(metrics_from_csv(slurp(dir.path / "out" / "metrics.csv")).size() == 3);
}

TEST_CASE("plot emission") {
  TempDir dir("cli_plot");
  SUBCASE("beta densities") {
    const auto prefix = (dir.path / "beta").string();
    auto r = run({"plot", "beta", "--betas", "2:2", "1:1", "--out", prefix});
    REQUIRE(r.code == kExitOk);
    const std::string csv = slurp(prefix + ".csv");
    CHECK(count_of(csv, "\n") == 1002);
    std::istringstream in(csv);
    std::string line;
    bool found = false;
    while (std::getline(in, line)) {
      if (line.rfind("0.5,", 0) == 0) {
        found = true;
        CHECK(std::stod(line.substr(4)) == doctest::Approx(1.5));
      }
    }
    CHECK(found);
    const std::string svg = slurp(prefix + ".svg");
    CHECK(well_formed_xml(svg));
    CHECK(count_of(svg, "class=\"series\"") == 2);
  }
  SUBCASE("loss curves") {
    std::vector<EpochRecord> recs;
    for (int e = 0; e < 350; ++e) recs.push_back({e, 0.01, 1.0 / (e + 1), 0.5});
    const auto a = dir.path / "base.csv", b = dir.path / "mix.csv";
    std::ofstream(a) << metrics_to_csv(recs);
    std::ofstream(b) << metrics_to_csv(recs);
    const auto prefix = (dir.path / "curve").string();
    auto r = run({"plot", a.string(), b.string(), "--out", prefix});
    REQUIRE(r.code == kExitOk);
    const std::string csv = slurp(prefix + ".csv");
    CHECK(count_of(csv, "\n") == 351);
    CHECK(csv.rfind("epoch,base_train_loss,base_val_acc,mix_train_loss,mix_val_acc", 0) == 0);
    const std::string svg = slurp(prefix + ".svg");
    CHECK(well_formed_xml(svg));
    CHECK(count_of(svg, "class=\"series\"") == 4);
  }
  SUBCASE("sweep bars") {
    const auto s = dir.path / "sweep.csv";
    std::ofstream(s) << "dataset,method,setting,mean,std\nMUTAG,if_mixup,Beta(1;1),0.8,0.01\nMUTAG,mixup_graph,Beta(1;1),0.7,0.02\n";
    const auto prefix = (dir.path / "bars").string();
    auto r = run({"plot", s.string(), "--out", prefix});
    REQUIRE(r.code == kExitOk);
    const std::string svg = slurp(prefix + ".svg");
    CHECK(well_formed_xml(svg));
    CHECK(count_of(svg, "class=\"bar\"") == 2);
  }
  SUBCASE("malformed metrics") {
    const auto bad = dir.path / "bad.csv";
    std::ofstream(bad) << "epoch,train_loss,val_acc\n0,zzz,1\n";
    auto r = run({"plot", bad.string(), "--kind", "loss_curve", "--out", (dir.path / "x").string()});
    CHECK(r.code == kExitDomainError);
    CHECK(r.err.find("bad.csv") != std::string::npos);
  }
}
