// Copyright 2026 The octsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "octsynth/tensor_io.hpp"
#include "support.hpp"

namespace {

using octsynth::testing::TempDir;

int run(const std::string& args) {
  const std::string cmd = std::string(OCTSYNTH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli");
  const auto out = (dir / "run").string();
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("train binarizer --out " + out), 2);
  EXPECT_EQ(run("train refiner --out " + out), 3);
  EXPECT_EQ(run("export-views " + (dir / "missing.p2v").string() + " --out " + out), 4);

  {
    std::ofstream bad(dir / "bad.json");
    bad << R"({"resolution": {"depth": 4}})";
  }
  EXPECT_EQ(run("make-phantoms --config " + (dir / "bad.json").string() + " --out " + out), 2);
  EXPECT_FALSE(std::filesystem::exists(dir / "run"));
}

TEST(Cli, FlagsOverrideConfig) {
  TempDir dir("cli_cfg");
  {
    std::ofstream cfg(dir / "run.json");
    cfg << R"({"seed": 5, "dataset": {"identities": 2, "impressions": 2}, "out": "ignored"})";
  }
  const auto out = (dir / "run").string();
  const std::string base = "--config " + (dir / "run.json").string() + " --out " + out;
  ASSERT_EQ(run("make-phantoms " + base + " --seed 11"), 0);
  const auto m = octsynth::load_manifest(dir / "run" / "phantoms" / "manifest.json");
  EXPECT_EQ(m.entries.size(), 4u);

  const std::string shown = (dir / "shown.json").string();
  ASSERT_EQ(std::system((std::string(OCTSYNTH_CLI_PATH) + " show-config " + base +
                         " --seed 11 --workers 2 > " + shown).c_str()),
            0);
  std::ifstream in(shown);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("\"seed\": 11"), std::string::npos);
  EXPECT_NE(text.find("\"workers\": 2"), std::string::npos);
  EXPECT_NE(text.find(out), std::string::npos);
}

}  // namespace
