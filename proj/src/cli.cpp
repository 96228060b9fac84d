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

#include "mage/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "mage/enclave_image.hpp"
#include "mage/fixtures.hpp"
#include "mage/mage_build.hpp"
#include "mage/mage_derive.hpp"
#include "mage/merkle.hpp"
#include "mage/migration.hpp"

namespace fs = std::filesystem;

namespace mage {
namespace {

constexpr std::string_view kManifestName = "manifest.txt";
constexpr std::string_view kSidecarName = "group.merkle";
constexpr std::string_view kPostSuffix = ".post";

struct ManifestLine {
  std::string filename;
  Measurement measurement{};
  std::uint64_t index = 0;
};

std::vector<ManifestLine> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<ManifestLine> out;
  std::string name, hex;
  std::uint64_t index = 0;
  while (in >> name >> hex >> index) {
    out.push_back({name, digest_from_hex(hex), index});
  }
  return out;
}

std::string mainfo_header(Variant v) {
  if (v == Variant::kSplit) {
    return "# mage-mainfo v1 split premr:32 count:8le offset:8le post_digest:32 "
           "post_pages:8le";
  }
  return "# mage-mainfo v1 basic premr:32 count:8le offset:8le";
}

Bytes read_mainfo_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    return from_hex(line);
  }
  throw Error(ErrorKind::kTruncated, path.string() + " holds no MAINFO record");
}

std::vector<fs::path> images_in(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".mimg") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_gen(const fs::path& out_path, std::size_t pages, std::size_t mars_pages,
            std::optional<std::size_t> mars_at, const std::string& variant,
            std::uint64_t seed, std::ostream& out) {
  DeterministicRandom rng(seed);
  ImageSpec spec;
  spec.content_pages = pages;
  spec.mars_pages = mars_pages;
  spec.mars_position = mars_at;
  spec.variant = variant_from_string(variant);
  write_image_file(out_path, make_random_image(spec, rng));
  out << "wrote " << out_path.string() << "\n";
  return kExitOk;
}

int cmd_measure(const fs::path& image, const std::string& loader, std::ostream& out) {
  const EnclaveImage img = read_image_file(image);
  out << to_hex(measure_with_loader(img, loader_from_string(loader))) << "\n";
  return kExitOk;
}

int cmd_mainfo(const fs::path& image, const std::string& out_file, std::ostream& out) {
  const EnclaveImage img = read_image_file(image);
  std::string record;
  if (img.variant == Variant::kSplit) {
    record = to_hex(derive_split_mainfo(img).serialize());
  } else {
    record = to_hex(derive_mainfo(img).serialize());
  }
  const std::string text = mainfo_header(img.variant) + "\n" + record + "\n";
  if (!out_file.empty()) {
    std::ofstream f(out_file);
    if (!f) throw Error(ErrorKind::kIo, "cannot write " + out_file);
    f << text;
  }
  out << text;
  return kExitOk;
}

int cmd_instrument(std::vector<std::string> paths, const fs::path& out_dir,
                   const std::string& order, const std::string& variant,
                   std::ostream& out) {
  if (order == "sort-by-name") {
    std::sort(paths.begin(), paths.end(), [](const std::string& a, const std::string& b) {
      return fs::path(a).filename() < fs::path(b).filename();
    });
  } else if (order != "as-given") {
    throw Error(ErrorKind::kInvalidArgument, "unknown order policy '" + order + "'");
  }
  std::vector<EnclaveImage> images;
  for (const auto& p : paths) images.push_back(read_image_file(p));
  if (!variant.empty()) {
    const Variant v = variant_from_string(variant);
    for (auto& img : images) img.variant = v;
  }

  InstrumentedGroup group = instrument_group(std::move(images));
  fs::create_directories(out_dir);
  std::ostringstream manifest;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto name = fs::path(paths[i]).filename();
    write_image_file(out_dir / name, group.images[i]);
    if (group.images[i].variant == Variant::kSplit) {
      write_file(out_dir / (name.string() + std::string(kPostSuffix)),
                 serialize_page_records(pages_after_mars(group.images[i])));
    }
    manifest << name.string() << ' ' << to_hex(group.measurements[i]) << ' ' << i << '\n';
  }
  if (group.tree) {
    write_file(out_dir / kSidecarName, MerkleSidecar::from_tree(*group.tree).serialize());
  }
  std::ofstream(out_dir / kManifestName) << manifest.str();
  out << manifest.str();
  return kExitOk;
}

int cmd_fill(const fs::path& image, const std::vector<std::string>& mainfo_files,
             const fs::path& out_path, std::ostream& out) {
  EnclaveImage img = read_image_file(image);
  if (img.variant != Variant::kBasic) {
    throw Error(ErrorKind::kInvalidArgument, "fill assembles basic sections only");
  }
  std::vector<Mainfo> entries;
  for (const auto& f : mainfo_files) entries.push_back(Mainfo::parse(read_mainfo_file(f)));
  img = fill_mars(std::move(img),
                  build_mars(entries, img.mars_bytes_size() / kPageSize));
  write_image_file(out_path, img);
  out << to_hex(final_measurement(img)) << "\n";
  return kExitOk;
}

int cmd_derive(const fs::path& image, std::uint64_t index, const std::string& post,
               const std::string& sidecar, std::ostream& out) {
  const EnclaveImage img = read_image_file(image);
  const MageView view = MageView::of(img);
  Measurement m{};
  switch (view.variant) {
    case Variant::kBasic:
      m = derive_measurement(view, index);
      break;
    case Variant::kSplit:
      m = derive_measurement_split(view, index, post.empty() ? Bytes{} : read_file(post));
      break;
    case Variant::kMerkle: {
      if (sidecar.empty()) {
        throw Error(ErrorKind::kInvalidArgument, "merkle images need --sidecar");
      }
      const auto s = MerkleSidecar::parse(read_file(sidecar));
      const auto n = mage_size(view);
      if (index >= n || index >= s.entries.size()) {
        throw Error(ErrorKind::kIndexOutOfRange,
                    "index " + std::to_string(index) + " >= " + std::to_string(n) +
                        " entries");
      }
      m = merkle_derive(view, index, s.entries[index], s.proofs[index]);
      break;
    }
  }
  out << index << ' ' << to_hex(m) << "\n";
  return kExitOk;
}

struct DemoMember {
  fs::path path;
  std::shared_ptr<const EnclaveImage> image;
  std::uint64_t index = 0;
};

int cmd_demo(const fs::path& dir, const std::string& adversary_spec,
             const std::string& initiator_name, const std::string& responder_name,
             std::size_t secret_size, std::uint64_t seed, const std::string& kex_name,
             std::ostream& out) {
  const Adversary adversary = Adversary::parse(adversary_spec);
  const auto files = images_in(dir);
  if (files.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "demo needs at least two .mimg images");
  }

  std::map<std::string, std::uint64_t> manifest_index;
  auto host = std::make_shared<HostStorage>();
  if (fs::exists(dir / kManifestName)) {
    for (const auto& line : read_manifest(dir / kManifestName)) {
      manifest_index[line.filename] = line.index;
      const fs::path post = dir / (line.filename + std::string(kPostSuffix));
      if (fs::exists(post)) host->post_content[line.index] = read_file(post);
    }
  }
  if (fs::exists(dir / kSidecarName)) {
    host->sidecar = MerkleSidecar::parse(read_file(dir / kSidecarName));
  }

  auto pick = [&](const std::string& name, std::size_t fallback) {
    DemoMember m;
    m.path = name.empty() ? files.at(fallback) : dir / name;
    if (std::find(files.begin(), files.end(), m.path) == files.end()) {
      throw Error(ErrorKind::kIo, "no image " + m.path.string() + " in group directory");
    }
    m.image = std::make_shared<const EnclaveImage>(read_image_file(m.path));
    const std::string fname = m.path.filename().string();
    if (auto it = manifest_index.find(fname); it != manifest_index.end()) {
      m.index = it->second;
    } else {
      // Not a listed member: claim the slot of its directory position.
      const auto pos = static_cast<std::uint64_t>(
          std::find(files.begin(), files.end(), m.path) - files.begin());
      const auto n = mage_size(MageView::of(*m.image));
      m.index = n == 0 ? pos : std::min(pos, n - 1);
    }
    return m;
  };
  const DemoMember a = pick(initiator_name, 0);
  const DemoMember b = pick(responder_name, 1);

  std::shared_ptr<const KeyExchange> kex;
  if (kex_name == "x25519") {
    kex = std::make_shared<X25519KeyExchange>();
  } else if (kex_name == "small") {
    kex = std::make_shared<SmallGroupKeyExchange>();
  } else {
    throw Error(ErrorKind::kInvalidArgument, "unknown key exchange '" + kex_name + "'");
  }

  DeterministicRandom root(seed);
  auto platform = std::make_shared<const Platform>(Platform::create(root));
  EnclaveRuntime ra(a.image, a.index, platform, kex,
                    std::make_unique<DeterministicRandom>(seed * 2 + 1));
  EnclaveRuntime rb(b.image, b.index, platform, kex,
                    std::make_unique<DeterministicRandom>(seed * 2 + 2));
  ra.attach_host_storage(host);
  rb.attach_host_storage(host);

  const Bytes secret = root.bytes(secret_size);
  Channel channel(adversary);
  const SessionResult r = run_session(ra, rb, channel, secret);

  out << r.transcript;
  out << "initiator " << a.path.filename().string() << " index " << a.index << " "
      << to_hex(ra.measurement()) << " " << r.initiator.to_string() << "\n";
  out << "responder " << b.path.filename().string() << " index " << b.index << " "
      << to_hex(rb.measurement()) << " " << r.responder.to_string() << "\n";
  out << "ack " << to_string(r.ack);
  if (r.ack == AckStatus::kFailed) out << "(" << to_string(r.ack_failure) << ")";
  out << "\n";

  const bool intact = r.secret_migrated() && *r.delivered_secret == secret;
  if (intact && r.ack == AckStatus::kConfirmed) {
    out << "secret migrated (" << secret.size() << " bytes)\n";
    return kExitOk;
  }
  out << (intact ? "secret migrated, acknowledgement lost\n" : "migration failed\n");
  return kExitVerification;
}

std::vector<std::size_t> parse_page_list(const std::string& list) {
  std::vector<std::size_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      const long v = std::stol(item);
      if (v <= 0) throw std::out_of_range("page count");
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::kInvalidArgument, "bad page count '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::kInvalidArgument, "empty page list");
  return out;
}

int cmd_bench(const std::string& pages, std::size_t entries, std::size_t iters,
              std::ostream& out) {
  out << "page_count,mean_ns\n";
  for (std::size_t p : parse_page_list(pages)) {
    const auto t = time_derivation(p, entries, iters);
    out << p << ',' << static_cast<std::uint64_t>(t.mean_ns) << '\n';
  }
  return kExitOk;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return kExitUsage;
    case ErrorKind::kCapacityExceeded:
    case ErrorKind::kSizeMismatch:
      return kExitCapacity;
    case ErrorKind::kIndexOutOfRange:
    case ErrorKind::kIntegrity:
    case ErrorKind::kProofInvalid:
    case ErrorKind::kCrypto:
      return kExitVerification;
    default:
      return kExitFormat;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mutual enclave measurement toolkit"};
  app.require_subcommand(1);

  std::string image, out_file, loader = "modified", order = "sort-by-name", variant;
  std::string post, sidecar, adversary = "honest", initiator, responder, kex = "x25519";
  std::string pages = "1,10,100,1000", group_dir, out_dir;
  std::vector<std::string> inputs, mainfos;
  std::uint64_t index = 0, seed = 1;
  std::size_t content_pages = 2, mars_pages = 1, entries = 1, iters = 0, secret_size = 1024;
  std::optional<std::size_t> mars_at;
  std::string gen_variant = "basic";

  auto* gen = app.add_subcommand("gen", "Write a random enclave image");
  gen->add_option("--out", out_file, "Output .mimg path")->required();
  gen->add_option("--pages", content_pages, "Content pages");
  gen->add_option("--mars-pages", mars_pages, "MARS pages (0 for none)");
  gen->add_option("--mars-at", mars_at, "Page-table position of the MARS");
  gen->add_option("--variant", gen_variant, "basic|split|merkle");
  gen->add_option("--seed", seed, "Random seed");

  auto* measure = app.add_subcommand("measure", "Print an image's measurement");
  measure->add_option("image", image)->required();
  measure->add_option("--loader", loader, "modified|unmodified");

  auto* mainfo = app.add_subcommand("mainfo", "Print an image's MAINFO record");
  mainfo->add_option("image", image)->required();
  mainfo->add_option("--out", out_file, "Also write the record to this file");

  auto* instrument = app.add_subcommand("instrument", "Instrument a group of images");
  instrument->add_option("images", inputs)->required();
  instrument->add_option("--out-dir", out_dir)->required();
  instrument->add_option("--order", order, "as-given|sort-by-name");
  instrument->add_option("--variant", variant, "basic|split|merkle");

  auto* fill = app.add_subcommand("fill", "Fill an image's MARS from exchanged MAINFO files");
  fill->add_option("image", image)->required();
  fill->add_option("--mainfo", mainfos, "MAINFO files in group order")->required();
  fill->add_option("--out", out_file)->required();

  auto* derive = app.add_subcommand("derive", "Derive a group member's measurement");
  derive->add_option("image", image)->required();
  derive->add_option("index", index)->required();
  derive->add_option("--post", post, "Host-supplied post-MARS pages (split)");
  derive->add_option("--sidecar", sidecar, "Merkle sidecar (merkle)");

  auto* demo = app.add_subcommand("demo", "Run a secret-migration session");
  demo->add_option("group_dir", group_dir)->required();
  demo->add_option("--adversary", adversary, "honest|drop:N|replay:N|tamper:N[:BYTE]");
  demo->add_option("--initiator", initiator, "Initiator image filename");
  demo->add_option("--responder", responder, "Responder image filename");
  demo->add_option("--secret-size", secret_size, "Bytes of secret to migrate");
  demo->add_option("--seed", seed, "Seed for platform and session randomness");
  demo->add_option("--kex", kex, "x25519|small");

  auto* bench = app.add_subcommand("bench", "Time measurement derivation");
  bench->add_option("--pages", pages, "Comma-separated MARS page counts");
  bench->add_option("--entries", entries, "MAINFO entries in the section");
  bench->add_option("--iters", iters, "Iterations per page count (0 = auto)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(out_file, content_pages, mars_pages, mars_at, gen_variant, seed, out);
    if (*measure) return cmd_measure(image, loader, out);
    if (*mainfo) return cmd_mainfo(image, out_file, out);
    if (*instrument) return cmd_instrument(inputs, out_dir, order, variant, out);
    if (*fill) return cmd_fill(image, mainfos, out_file, out);
    if (*derive) return cmd_derive(image, index, post, sidecar, out);
    if (*demo) {
      return cmd_demo(group_dir, adversary, initiator, responder, secret_size, seed, kex, out);
    }
    if (*bench) return cmd_bench(pages, entries, iters, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error (i/o): " << e.what() << "\n";
    return kExitFormat;
  }
  return kExitUsage;
}

}  // namespace mage
