// Copyright 2026 The Mage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mage/cli.hpp"
#include "mage/enclave_image.hpp"
#include "mage/mage_build.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace mage;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mage");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mage_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void gen(const std::string& name, int seed, int pages = 2, int mars_pages = 1,
           const std::string& variant = "basic") {
    ASSERT_EQ(cli({"gen", "--out", path(name), "--seed", std::to_string(seed), "--pages",
                   std::to_string(pages), "--mars-pages", std::to_string(mars_pages),
                   "--variant", variant})
                  .code,
              0);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, MeasureMatchesOracle) {
  gen("a.mimg", 1);
  const CliRun r = cli({"measure", path("a.mimg")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, to_hex(oracle::measure_modified(read_image_file(path("a.mimg")))) + "\n");
  const CliRun u = cli({"measure", path("a.mimg"), "--loader", "unmodified"});
  EXPECT_EQ(u.out, to_hex(oracle::measure_unmodified(read_image_file(path("a.mimg")))) + "\n");
  EXPECT_NE(r.out, u.out);
}

TEST_F(CliTest, LoadersAgreeWithoutMars) {
  gen("plain.mimg", 2, 3, 0);
  EXPECT_EQ(cli({"measure", path("plain.mimg")}).out,
            cli({"measure", path("plain.mimg"), "--loader", "unmodified"}).out);
}

TEST_F(CliTest, MeasureBadFile) {
  std::ofstream(path("junk.mimg")) << std::string(200, 'x');
  const CliRun r = cli({"measure", path("junk.mimg")});
  EXPECT_EQ(r.code, kExitFormat);
  EXPECT_NE(r.err.find("bad magic"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"measure", path("missing.mimg")}).code, kExitFormat);
}

TEST_F(CliTest, MainfoRecord) {
  gen("one.mimg", 3, 1);
  const CliRun r = cli({"mainfo", path("one.mimg"), "--out", path("one.mainfo")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0].rfind("# mage-mainfo v1", 0), 0u);
  const Mainfo m = Mainfo::parse(from_hex(ls[1]));
  EXPECT_EQ(m.count, 5248u);
  EXPECT_EQ(cli({"mainfo", path("one.mimg")}).out, r.out);
  gen("plain.mimg", 4, 2, 0);
  EXPECT_EQ(cli({"mainfo", path("plain.mimg")}).code, kExitFormat);
}

TEST_F(CliTest, InstrumentWritesIdenticalMarsAndManifest) {
  gen("b.mimg", 5, 3);
  gen("a.mimg", 6, 2);
  const CliRun r = cli({"instrument", path("b.mimg"), path("a.mimg"), "--out-dir", path("g")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto manifest = lines(r.out);
  ASSERT_EQ(manifest.size(), 2u);
  // Sorted by name by default.
  EXPECT_EQ(manifest[0].substr(0, 7), "a.mimg ");
  EXPECT_EQ(manifest[1].substr(manifest[1].size() - 2), " 1");
  const auto a = read_image_file(path("g/a.mimg"));
  const auto b = read_image_file(path("g/b.mimg"));
  EXPECT_EQ(a.mars_bytes(), b.mars_bytes());
  EXPECT_NE(manifest[0].find(to_hex(oracle::measure_modified(a))), std::string::npos);

  const CliRun given = cli({"instrument", path("b.mimg"), path("a.mimg"), "--out-dir", path("h"),
                         "--order", "as-given"});
  EXPECT_EQ(lines(given.out)[0].substr(0, 7), "b.mimg ");
}

TEST_F(CliTest, DeriveCrossChecksManifest) {
  gen("a.mimg", 7);
  gen("b.mimg", 8, 4);
  gen("c.mimg", 9, 1);
  const auto manifest =
      lines(cli({"instrument", path("a.mimg"), path("b.mimg"), path("c.mimg"), "--out-dir", path("g")}).out);
  for (const char* member : {"a.mimg", "b.mimg", "c.mimg"}) {
    for (std::size_t j = 0; j < 3; ++j) {
      const CliRun d = cli({"derive", path(std::string("g/") + member), std::to_string(j)});
      ASSERT_EQ(d.code, 0) << d.err;
      const std::string hex = manifest[j].substr(7, 64);
      EXPECT_EQ(d.out, std::to_string(j) + " " + hex + "\n");
    }
  }
  // Self index reproduces the image's own measurement.
  EXPECT_EQ(cli({"derive", path("g/b.mimg"), "1"}).out.substr(2),
            cli({"measure", path("g/b.mimg")}).out);
  const CliRun out_of_range = cli({"derive", path("g/a.mimg"), "3"});
  EXPECT_EQ(out_of_range.code, kExitVerification);
}

TEST_F(CliTest, OverCapacityGroupNamesLimit) {
  std::vector<std::string> args{"instrument"};
  for (int i = 0; i < 86; ++i) {
    const std::string name = "m" + std::to_string(100 + i) + ".mimg";
    gen(name, 1000 + i, 1);
    args.push_back(path(name));
  }
  args.push_back("--out-dir");
  args.push_back(path("g"));
  const CliRun r = cli(args);
  EXPECT_EQ(r.code, kExitCapacity);
  EXPECT_NE(r.err.find("85"), std::string::npos) << r.err;
}

TEST_F(CliTest, FillFromExchangedMainfos) {
  gen("a.mimg", 10);
  gen("b.mimg", 11, 3);
  cli({"mainfo", path("a.mimg"), "--out", path("a.mainfo")});
  cli({"mainfo", path("b.mimg"), "--out", path("b.mainfo")});
  const CliRun fa = cli({"fill", path("a.mimg"), "--mainfo", path("a.mainfo"), path("b.mainfo"),
                      "--out", path("a.filled.mimg")});
  ASSERT_EQ(fa.code, 0) << fa.err;
  cli({"instrument", path("a.mimg"), path("b.mimg"), "--out-dir", path("g")});
  EXPECT_EQ(read_file(path("a.filled.mimg")), read_file(path("g/a.mimg")));
}

TEST_F(CliTest, SplitAndMerkleDerivation) {
  gen("a.mimg", 12, 4, 1, "split");
  gen("b.mimg", 13, 3, 1, "split");
  ASSERT_EQ(cli({"instrument", path("a.mimg"), path("b.mimg"), "--out-dir", path("s")}).code, 0);
  const auto manifest = lines(cli({"instrument", path("a.mimg"), path("b.mimg"), "--out-dir", path("s")}).out);
  const CliRun d = cli({"derive", path("s/a.mimg"), "1", "--post", path("s/b.mimg.post")});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(d.out, "1 " + manifest[1].substr(7, 64) + "\n");
  const CliRun wrong = cli({"derive", path("s/a.mimg"), "1", "--post", path("s/a.mimg.post")});
  EXPECT_EQ(wrong.code, kExitVerification);

  gen("x.mimg", 14, 2, 1, "merkle");
  gen("y.mimg", 15, 2, 1, "merkle");
  gen("z.mimg", 16, 5, 1, "merkle");
  const auto mm = lines(cli({"instrument", path("x.mimg"), path("y.mimg"), path("z.mimg"),
                             "--out-dir", path("m")})
                            .out);
  ASSERT_EQ(mm.size(), 3u);
  const CliRun md = cli({"derive", path("m/x.mimg"), "2", "--sidecar", path("m/group.merkle")});
  ASSERT_EQ(md.code, 0) << md.err;
  EXPECT_EQ(md.out, "2 " + mm[2].substr(7, 64) + "\n");
  EXPECT_EQ(cli({"derive", path("m/x.mimg"), "2"}).code, kExitUsage);
}

TEST_F(CliTest, DemoHonestAndAdversarial) {
  gen("a.mimg", 17);
  gen("b.mimg", 18, 3);
  cli({"instrument", path("a.mimg"), path("b.mimg"), "--out-dir", path("g")});
  const CliRun honest = cli({"demo", path("g"), "--kex", "small"});
  EXPECT_EQ(honest.code, 0) << honest.out << honest.err;
  EXPECT_NE(honest.out.find("secret migrated"), std::string::npos);
  EXPECT_EQ(cli({"demo", path("g"), "--kex", "small"}).out, honest.out);
  EXPECT_EQ(cli({"demo", path("g")}).code, 0);

  const CliRun tamper = cli({"demo", path("g"), "--adversary", "tamper:1"});
  EXPECT_EQ(tamper.code, kExitVerification);
  EXPECT_NE(tamper.out.find("Aborted(integrity)"), std::string::npos) << tamper.out;
  EXPECT_EQ(cli({"demo", path("g"), "--adversary", "bogus"}).code, kExitUsage);
}

TEST_F(CliTest, DemoImpostorAbortsOnIdentity) {
  gen("a.mimg", 19);
  gen("b.mimg", 20, 3);
  gen("c.mimg", 21, 2);
  cli({"instrument", path("a.mimg"), path("b.mimg"), "--out-dir", path("g")});
  cli({"mainfo", path("a.mimg"), "--out", path("a.mainfo")});
  cli({"mainfo", path("b.mimg"), "--out", path("b.mainfo")});
  // Carries the group's MARS but is not a member.
  cli({"fill", path("c.mimg"), "--mainfo", path("a.mainfo"), path("b.mainfo"), "--out",
       path("g/c.mimg")});
  EXPECT_EQ(read_image_file(path("g/c.mimg")).mars_bytes(),
            read_image_file(path("g/a.mimg")).mars_bytes());
  const CliRun as_responder = cli({"demo", path("g"), "--initiator", "a.mimg", "--responder", "c.mimg"});
  EXPECT_EQ(as_responder.code, kExitVerification);
  EXPECT_NE(as_responder.out.find("Aborted(auth)"), std::string::npos) << as_responder.out;
  EXPECT_NE(as_responder.out.find("migration failed"), std::string::npos);
  const CliRun as_initiator = cli({"demo", path("g"), "--initiator", "c.mimg", "--responder", "b.mimg"});
  EXPECT_EQ(as_initiator.code, kExitVerification);
  EXPECT_NE(as_initiator.out.find("Aborted(identity)"), std::string::npos) << as_initiator.out;
}

TEST_F(CliTest, BenchCsv) {
  const CliRun r = cli({"bench", "--pages", "1,4,16", "--iters", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[0], "page_count,mean_ns");
  EXPECT_EQ(ls[1].substr(0, 2), "1,");
  EXPECT_EQ(ls[3].substr(0, 3), "16,");
  EXPECT_EQ(cli({"bench", "--pages", "0"}).code, kExitUsage);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"derive"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST_F(CliTest, BenchTimingsGrowWithPages) {
  const CliRun r = cli({"bench", "--pages", "1,10,100,1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 5u);
  double previous = 0;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const double ns = std::stod(ls[i].substr(ls[i].find(',') + 1));
    EXPECT_GE(ns, previous) << ls[i];
    previous = ns;
  }
}
