#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

struct CliDir {
  fs::path path;
  CliDir() {
    path = fs::temp_directory_path() /
           ("iris_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~CliDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

int run(const std::string& args, const fs::path& out) {
  const std::string cmd = IRIS_CLI_PATH " "s + args + " >" + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

const char* kSmallGen = "--n 6 --dim 8 --t-min 60 --t-max 120 --noise 0.1";

}  // namespace

TEST_CASE("cli: generate is deterministic and writes a manifest") {
  CliDir dir;
  const fs::path log = dir.path / "log.txt";
  const std::string gen = "generate --seed 7 "s + kSmallGen;

  REQUIRE(run(gen + " --out " + (dir.path / "a").string(), log) == 0);
  REQUIRE(run(gen + " --out " + (dir.path / "b").string(), log) == 0);

  for (const char* name :
       {"manifest.json", "rec_0000.sheet.json", "rec_0000.emb.f64", "rec_0003.labels.txt"}) {
    CHECK(slurp(dir.path / "a" / name) == slurp(dir.path / "b" / name));
    CHECK(!slurp(dir.path / "a" / name).empty());
  }

  // different seed changes the data
  REQUIRE(run("generate --seed 8 "s + kSmallGen + " --out " + (dir.path / "c").string(), log) ==
          0);
  CHECK(slurp(dir.path / "a" / "rec_0000.emb.f64") != slurp(dir.path / "c" / "rec_0000.emb.f64"));
}

TEST_CASE("cli: generate into an unwritable path fails without a manifest") {
  CliDir dir;
  const fs::path log = dir.path / "log.txt";
  // a regular file blocks directory creation
  const fs::path blocked = dir.path / "blocked";
  std::ofstream(blocked) << "file";
  CHECK(run("generate --seed 7 "s + kSmallGen + " --out " + blocked.string(), log) == 2);
  CHECK(!fs::exists(blocked / "manifest.json"));
}

TEST_CASE("cli: train writes a model with magic bytes and a per-epoch log") {
  CliDir dir;
  const fs::path log = dir.path / "log.txt";
  const fs::path data = dir.path / "data";
  REQUIRE(run("generate --seed 7 "s + kSmallGen + " --out " + data.string(), log) == 0);

  const fs::path model = dir.path / "model.iris";
  const fs::path train_log = dir.path / "train.csv";
  REQUIRE(run("train --data " + data.string() + " --out " + model.string() +
                  " --variant full --epochs 2 --batch 4 --log " + train_log.string(),
              log) == 0);
  const std::string bytes = slurp(model);
  REQUIRE(bytes.size() > 4);
  CHECK(bytes.substr(0, 4) == "IRIS");

  const std::string csv = slurp(train_log);
  CHECK(csv.find("epoch,seg_loss,element_loss,pcs_loss,score_loss,total_loss") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 epochs

  SUBCASE("same seed reproduces the model byte for byte") {
    const fs::path model2 = dir.path / "model2.iris";
    REQUIRE(run("train --data " + data.string() + " --out " + model2.string() +
                    " --variant full --epochs 2 --batch 4",
                log) == 0);
    CHECK(slurp(model) == slurp(model2));
  }

  SUBCASE("score-only ablation variant trains") {
    const fs::path model3 = dir.path / "model3.iris";
    CHECK(run("train --data " + data.string() + " --out " + model3.string() +
                  " --variant score-only --epochs 2 --batch 4",
              log) == 0);
  }

  SUBCASE("evaluate and report run end to end") {
    const fs::path csv_path = dir.path / "eval.csv";
    const fs::path out_path = dir.path / "eval.txt";
    REQUIRE(run("evaluate --model " + model.string() + " --data " + data.string() + " --csv " +
                    csv_path.string() + " --out " + out_path.string(),
                log) == 0);
    CHECK(slurp(csv_path).find("spearman_total") != std::string::npos);
    CHECK(slurp(out_path).find("Spearman") != std::string::npos);

    const fs::path report_path = dir.path / "report.txt";
    REQUIRE(run("report --model " + model.string() + " --record " +
                    (data / "rec_0000").string() + " --out " + report_path.string(),
                log) == 0);
    const std::string report = slurp(report_path);
    CHECK(report.find("Total Score") != std::string::npos);
    CHECK(report.find("TES subtotal") != std::string::npos);

    const fs::path html_path = dir.path / "report.html";
    REQUIRE(run("report --model " + model.string() + " --record " +
                    (data / "rec_0000").string() + " --format html --out " + html_path.string(),
                log) == 0);
    CHECK(slurp(html_path).find("<!DOCTYPE html>") == 0);
  }
}

TEST_CASE("cli: exit codes for bad inputs") {
  CliDir dir;
  const fs::path log = dir.path / "log.txt";

  // missing dataset directory: validation error naming the path
  CHECK(run("train --data " + (dir.path / "nope").string() + " --out " +
                (dir.path / "m.iris").string() + " --epochs 1",
            log) == 1);
  CHECK(slurp(log).find("nope") != std::string::npos);

  // dataset with a missing pair member: validation error listing the file
  const fs::path data = dir.path / "data";
  REQUIRE(run("generate --seed 7 "s + kSmallGen + " --out " + data.string(), log) == 0);
  fs::remove(data / "rec_0002.labels.txt");
  CHECK(run("train --data " + data.string() + " --out " + (dir.path / "m.iris").string() +
                " --epochs 1",
            log) == 1);
  CHECK(slurp(log).find("rec_0002.labels.txt") != std::string::npos);

  // unknown variant
  fs::remove_all(data);
  REQUIRE(run("generate --seed 7 "s + kSmallGen + " --out " + data.string(), log) == 0);
  CHECK(run("train --data " + data.string() + " --out " + (dir.path / "m.iris").string() +
                " --variant nonsense --epochs 1",
            log) == 1);

  // evaluating on 2 records: correlation undefined
  const fs::path model = dir.path / "model.iris";
  REQUIRE(run("train --data " + data.string() + " --out " + model.string() +
                  " --epochs 1 --batch 4",
              log) == 0);
  CHECK(run("evaluate --model " + model.string() + " --data " + data.string() +
                " --train-count 4",
            log) == 1);

  // missing model file
  CHECK(run("evaluate --model " + (dir.path / "ghost.iris").string() + " --data " +
                data.string(),
            log) == 1);
}

TEST_CASE("cli: config file provides defaults, flags override") {
  CliDir dir;
  const fs::path log = dir.path / "log.txt";
  const fs::path cfg = dir.path / "cfg.json";
  std::ofstream(cfg) << R"({"n": 4, "seed": 7, "dim": 8, "t_min": 60, "t_max": 120, "noise": 0.1})";

  const fs::path a = dir.path / "a";
  REQUIRE(run("--config " + cfg.string() + " generate --out " + a.string(), log) == 0);
  CHECK(fs::exists(a / "rec_0003.sheet.json"));
  CHECK(!fs::exists(a / "rec_0004.sheet.json"));

  // explicit flag beats the config value
  const fs::path b = dir.path / "b";
  REQUIRE(run("--config " + cfg.string() + " generate --n 5 --out " + b.string(), log) == 0);
  CHECK(fs::exists(b / "rec_0004.sheet.json"));
}
