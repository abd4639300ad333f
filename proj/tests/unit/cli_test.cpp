#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const fs::path& stdout_file = {}) {
  std::string cmd = std::string(DISENT_CLI_PATH) + " " + args;
  cmd += stdout_file.empty() ? " >/dev/null" : " >" + stdout_file.string();
  cmd += " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path path = fs::path(::testing::TempDir()) / name;
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kQuickWine = "dataset = wine\nmodel.latent_channels = 8\ntrain.epochs = 2\n";

}  // namespace

TEST(Cli, ValidateExitCodes) {
  EXPECT_EQ(run("validate " + write_config("ok.ini", "dataset = thyroid\n").string()), 0);
  EXPECT_EQ(run("validate " + write_config("bad.ini", "dataset = thyroid\ntrain.learning_rate = -1\n").string()),
            2);
  EXPECT_NE(run("validate"), 0);
  EXPECT_NE(run("frobnicate"), 0);
}

TEST(Cli, RunIsDeterministicAndHonorsOverrides) {
  const fs::path config = write_config("quick.ini", kQuickWine);
  const fs::path a = fs::path(::testing::TempDir()) / "cli_a";
  const fs::path b = fs::path(::testing::TempDir()) / "cli_b";
  fs::remove_all(a);
  fs::remove_all(b);
  ASSERT_EQ(run("run " + config.string() + " --trials 1 --seed 4 --output-dir " + a.string()), 0);
  ASSERT_EQ(run("run " + config.string() + " --trials 1 --seed 4 --output-dir " + b.string()), 0);
  EXPECT_EQ(slurp(a / "metrics.json"), slurp(b / "metrics.json"));
  EXPECT_TRUE(fs::exists(a / "trial_4_scores.csv"));
  EXPECT_FALSE(fs::exists(a / "trial_5_scores.csv"));
}

TEST(Cli, RunFailureIsNonzero) {
  const fs::path config =
      write_config("missing.ini", std::string(kQuickWine) + "dataset_path = /nonexistent/x.csv\n");
  const fs::path out = fs::path(::testing::TempDir()) / "cli_fail";
  EXPECT_EQ(run("run " + config.string() + " --output-dir " + out.string()), 1);
  EXPECT_NE(slurp(out / "manifest.json").find("\"complete\": false"), std::string::npos);
}

TEST(Cli, ScoreAndExportFromCheckpoint) {
  const fs::path config = write_config("ck.ini", kQuickWine);
  const fs::path out = fs::path(::testing::TempDir()) / "cli_ck";
  fs::remove_all(out);
  ASSERT_EQ(run("run " + config.string() + " --trials 1 --save-checkpoints --output-dir " + out.string()), 0);
  ASSERT_TRUE(fs::exists(out / "trial_0.ckpt"));

  const fs::path data = fs::path(DISENT_TEST_DATA_DIR) / "wine.csv";
  const fs::path scores = out / "scores.csv";
  ASSERT_EQ(run("score " + (out / "trial_0.ckpt").string() + " " + data.string(), scores), 0);
  const std::string text = slurp(scores);
  EXPECT_EQ(text.rfind("row,score\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 129);

  ASSERT_EQ(run("export-attn " + (out / "trial_0.ckpt").string() + " " + data.string() + " " +
                (out / "exported").string()),
            0);
  EXPECT_TRUE(fs::exists(out / "exported_head0.csv"));
  EXPECT_TRUE(fs::exists(out / "exported_head1.csv"));
  EXPECT_NE(run("score " + (out / "trial_0.ckpt").string() + " " + config.string()), 0);
}
