/* Copyright 2026 The Gicx Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Drives the gicx binary: exit codes, flag precedence and messages.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "gicx/numerics/byte_io.h"

namespace gicx {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / ("gicx_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "tiny.cfg") << "# small enough for a unit test\n"
                                        "model.height = 12\nmodel.width = 12\n"
                                        "model.widths = 4,4,4\nmodel.embed_dim = 8\n"
                                        "model.tokens = 2\nmodel.dims = 4\n"
                                        "model.cond_hidden = 4\ntrain.steps = 20\n"
                                        "train.batch = 2\ninversion.steps = 10\n"
                                        "sampler.steps = 4\ndataset.count = 3\n";
    ASSERT_EQ(Run("gen-dataset --config tiny.cfg data"), 0);
    ASSERT_EQ(Run("train --config tiny.cfg data a.gckp"), 0);
    ASSERT_EQ(Run("train --config tiny.cfg --seed 9 data b.gckp"), 0);
    ASSERT_EQ(Run("compress --config tiny.cfg --checkpoint a.gckp data/img_000.ppm a.gicx"), 0);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  // Exit status of `gicx args` run inside the scratch directory; stdout and
  // stderr land in out.txt.
  static int Run(const std::string& args) {
    const std::string cmd = "cd '" + dir_.string() + "' && '" GICX_CLI_PATH "' " + args +
                            " > out.txt 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  static std::string Output() {
    std::ifstream in(dir_ / "out.txt");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  static fs::path dir_;
};
fs::path CliTest::dir_;

TEST_F(CliTest, HelpDocumentsCsvSchemasAndExitCodes) {
  EXPECT_EQ(Run("--help"), 0);
  const std::string help = Output();
  EXPECT_NE(help.find("s_c,s_f,image,psnr,ssim,bpp"), std::string::npos);
  EXPECT_NE(help.find("image,psnr,ssim,bpp,bpp_std"), std::string::npos);
  EXPECT_NE(help.find("4 numeric failure"), std::string::npos);
  for (const char* verb : {"train", "compress", "decompress", "sweep", "eval", "gen-dataset"}) {
    EXPECT_NE(help.find(verb), std::string::npos) << verb;
  }
}

TEST_F(CliTest, UsageErrorsExitWithTwo) {
  EXPECT_EQ(Run(""), 2);
  EXPECT_EQ(Run("frobnicate"), 2);
  EXPECT_EQ(Run("compress"), 2);
  EXPECT_EQ(Run("config --preset huge"), 2);
  EXPECT_EQ(Run("config --set bogus=1"), 2);
  EXPECT_NE(Output().find("unknown config key 'bogus'"), std::string::npos) << Output();
  EXPECT_EQ(Run("config --eta 3"), 2);
  EXPECT_EQ(Run("compress --config tiny.cfg --checkpoint missing.gckp data/img_000.ppm x.gicx"),
            2);
  EXPECT_EQ(Run("train --config tiny.cfg no_such_dir x.gckp"), 2);
}

TEST_F(CliTest, FlagsBeatSetBeatsConfigFile) {
  ASSERT_EQ(Run("config --config tiny.cfg --set sampler.steps=7 --steps 9 --set seed=3"), 0);
  const std::string out = Output();
  EXPECT_NE(out.find("sampler.steps = 9\n"), std::string::npos);
  EXPECT_NE(out.find("seed = 3\n"), std::string::npos);
  EXPECT_NE(out.find("model.height = 12\n"), std::string::npos);
  ASSERT_EQ(Run("config --preset paper"), 0);
  EXPECT_NE(Output().find("model.dims = 768\n"), std::string::npos);
}

TEST_F(CliTest, CompressPrintsTheRateBreakdown) {
  ASSERT_EQ(Run("compress --config tiny.cfg --checkpoint a.gckp data/img_001.ppm c.gicx"), 0);
  const std::string out = Output();
  EXPECT_NE(out.find("embedding symbol count 8 (2 x 4)"), std::string::npos) << out;
  const auto bytes = ReadFileBytes((dir_ / "c.gicx").string());
  char expected[64];
  std::snprintf(expected, sizeof(expected), "bpp %.6f = embedding",
                8.0 * static_cast<double>(bytes.size()) / 144.0);
  EXPECT_NE(out.find(expected), std::string::npos) << out;
}

TEST_F(CliTest, DecompressWritesOneFilePerSample) {
  ASSERT_EQ(Run("decompress --config tiny.cfg --checkpoint a.gckp a.gicx s.ppm --samples 3 "
                "--eta 1"),
            0);
  for (const char* f : {"s_0.ppm", "s_1.ppm", "s_2.ppm"}) EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  EXPECT_NE(ReadFileBytes((dir_ / "s_0.ppm").string()),
            ReadFileBytes((dir_ / "s_1.ppm").string()));
}

TEST_F(CliTest, IncompatibleOrDamagedInputExitsWithThree) {
  EXPECT_EQ(Run("decompress --config tiny.cfg --checkpoint b.gckp a.gicx o.ppm"), 3);
  EXPECT_NE(Output().find("incompatible"), std::string::npos) << Output();
  auto bytes = ReadFileBytes((dir_ / "a.gicx").string());
  bytes[0] = 'X';
  WriteFileBytes((dir_ / "bad.gicx").string(), bytes);
  EXPECT_EQ(Run("decompress --config tiny.cfg --checkpoint a.gckp bad.gicx o.ppm"), 3);
  bytes = ReadFileBytes((dir_ / "a.gicx").string());
  bytes.resize(bytes.size() - 3);
  WriteFileBytes((dir_ / "short.gicx").string(), bytes);
  EXPECT_EQ(Run("decompress --config tiny.cfg --checkpoint a.gckp short.gicx o.ppm"), 3);
  std::ofstream(dir_ / "bad.ppm") << "P3\n1 1\n255\n0 0 0\n";
  EXPECT_EQ(Run("compress --config tiny.cfg --checkpoint a.gckp bad.ppm o.gicx"), 3);
}

TEST_F(CliTest, NonFiniteValuesExitWithFour) {
  EXPECT_EQ(Run("decompress --config tiny.cfg --checkpoint a.gckp a.gicx o.ppm --sc 1e308"), 4);
  EXPECT_NE(Output().find("numeric failure"), std::string::npos) << Output();
}

}  // namespace
}  // namespace gicx
