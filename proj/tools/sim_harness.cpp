// sim_harness: scenario simulation plus codec/crc/dpr debugging subcommands.
//
// Exit codes: 0 success, 1 codec/crc input rejected, 2 configuration or usage
// error, 3 internal invariant violation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mcc/bytes.hpp"
#include "mcc/crc32.hpp"
#include "mcc/dpr.hpp"
#include "mcc/scenario.hpp"
#include "mcc/simulation.hpp"
#include "mcc/wire_codec.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRejected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

// CRC-free field bytes of each object, in wire order.
constexpr std::size_t kGpsFieldBytes = 56;
constexpr std::size_t kReportedFieldBytes = 56;

std::optional<mcc::Bytes> parse_hex_arg(const std::string& hex) {
  auto bytes = mcc::from_hex(hex);
  if (!bytes) std::cerr << "error: --hex is not valid hex\n";
  return bytes;
}

int run_crc(const std::string& poly_text, const std::string& hex) {
  const auto poly = mcc::from_hex(poly_text);
  if (!poly || poly->size() != 4) {
    std::cerr << "error: --poly must be 8 hex digits\n";
    return kExitConfig;
  }
  const auto data = parse_hex_arg(hex);
  if (!data) return kExitConfig;
  const std::uint32_t koopman = (std::uint32_t{(*poly)[0]} << 24) | (std::uint32_t{(*poly)[1]} << 16) |
                                (std::uint32_t{(*poly)[2]} << 8) | std::uint32_t{(*poly)[3]};
  std::printf("%08x\n", mcc::crc32_koopman(koopman, *data));
  return kExitOk;
}

/// encode-*: field bytes (CRCs omitted) -> full frame.
/// decode-*: full frame -> verified field bytes (CRCs stripped).
int run_codec(const std::string& op, const std::string& hex) {
  const auto input = parse_hex_arg(hex);
  if (!input) return kExitConfig;
  const mcc::Bytes& in = *input;

  if (op == "encode-gps") {
    if (in.size() != kGpsFieldBytes) {
      std::cerr << "error: encode-gps takes " << kGpsFieldBytes << " field bytes, got " << in.size() << "\n";
      return kExitRejected;
    }
    mcc::Bytes frame(in);
    frame.resize(mcc::kGpsFrameSize);
    frame = mcc::encode_gps(mcc::decode_gps_fields(frame)).vector();
    std::cout << mcc::to_hex(frame) << "\n";
    return kExitOk;
  }
  if (op == "decode-gps") {
    const auto obj = mcc::decode_gps(in);
    if (!obj) {
      std::cerr << "error: " << mcc::to_string(obj.error()) << "\n";
      return kExitRejected;
    }
    std::cout << mcc::to_hex(mcc::ByteView(in).first(kGpsFieldBytes)) << "\n";
    return kExitOk;
  }
  if (op == "encode-reported") {
    if (in.size() != kReportedFieldBytes) {
      std::cerr << "error: encode-reported takes " << kReportedFieldBytes << " field bytes, got " << in.size() << "\n";
      return kExitRejected;
    }
    // splice the two CRC slots in, then let the encoder fill them
    namespace r = mcc::layout::reported;
    mcc::Bytes frame(mcc::kReportedFrameSize, 0);
    std::copy(in.begin(), in.begin() + r::kPositionCrc, frame.begin());
    std::copy(in.begin() + r::kPositionCrc, in.end(), frame.begin() + r::kAltitude);
    frame = mcc::encode_reported(mcc::decode_reported_fields(frame)).vector();
    std::cout << mcc::to_hex(frame) << "\n";
    return kExitOk;
  }
  if (op == "decode-reported") {
    const auto obj = mcc::decode_reported(in);
    if (!obj) {
      std::cerr << "error: " << mcc::to_string(obj.error()) << "\n";
      return kExitRejected;
    }
    namespace r = mcc::layout::reported;
    mcc::Bytes fields(in.begin(), in.begin() + r::kPositionCrc);
    fields.insert(fields.end(), in.begin() + r::kAltitude, in.begin() + r::kFrameCrc);
    std::cout << mcc::to_hex(fields) << "\n";
    return kExitOk;
  }
  std::cerr << "error: unknown codec operation '" << op << "'\n";
  return kExitConfig;
}

std::optional<mcc::Scenario> load_or_report(const std::string& path) {
  auto scenario = mcc::load_scenario(path);
  if (!scenario) {
    std::cerr << "config error: " << scenario.error().message << "\n";
    return std::nullopt;
  }
  return std::move(scenario).value();
}

int run_simulate(const std::string& scenario_path, std::optional<std::uint64_t> seed,
                 std::optional<std::uint64_t> cycles, const std::string& out_path) {
  auto scenario = load_or_report(scenario_path);
  if (!scenario) return kExitConfig;
  if (seed) scenario->seed = *seed;
  if (cycles) {
    if (*cycles == 0) {
      std::cerr << "config error: cycles: must be positive\n";
      return kExitConfig;
    }
    scenario->cycles = *cycles;
  }

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (out_path != "-") {
    file.open(out_path, std::ios::out | std::ios::trunc);
    if (!file) {
      std::cerr << "config error: cannot write '" << out_path << "'\n";
      return kExitConfig;
    }
    out = &file;
  }
  try {
    mcc::Simulation sim(std::move(*scenario));
    sim.run(*out);
  } catch (const mcc::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

int run_dpr_dump(const std::string& region, const std::string& scenario_path, std::optional<std::uint64_t> cycles,
                 bool all_buffers) {
  mcc::Scenario scenario;
  if (!scenario_path.empty()) {
    auto loaded = load_or_report(scenario_path);
    if (!loaded) return kExitConfig;
    scenario = std::move(*loaded);
  }
  scenario.cycles = cycles.value_or(scenario_path.empty() ? 0 : scenario.cycles);

  std::optional<mcc::Simulation> sim;
  std::optional<mcc::ActiveDpr> bare;
  mcc::ActiveDpr* dpr = nullptr;
  try {
    if (scenario.cycles > 0) {
      sim.emplace(scenario);
      while (!sim->finished()) sim->step();
      dpr = &sim->dpr();
    } else {
      bare.emplace(scenario.memory_map);
      dpr = &*bare;
    }
  } catch (const mcc::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariant;
  }

  const auto snap = dpr->snapshot(region);
  if (!snap) {
    std::cerr << "config error: unknown region '" << region << "'\n";
    return kExitConfig;
  }
  const mcc::RegionSnapshot& s = snap.value();
  std::printf("# region %s offset 0x%04x length %u roles write=%u read=%u scrub=%u\n", s.spec.name.c_str(),
              s.spec.offset, s.spec.length, s.roles.write, s.roles.read, s.roles.scrub);
  if (all_buffers) {
    for (std::size_t i = 0; i < 3; ++i) std::printf("buffer%zu %s\n", i, mcc::to_hex(s.buffers[i]).c_str());
  } else {
    std::printf("%s\n", mcc::to_hex(s.buffers[s.roles.read]).c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-criticality UAV communication simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_path = "-";
  std::optional<std::uint64_t> seed, cycles;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write JSON-lines metrics");
  simulate->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--cycles", cycles, "Override the cycle count");
  simulate->add_option("--out", out_path, "Metrics file ('-' for stdout)");

  std::string codec_op, codec_hex;
  auto* codec = app.add_subcommand("codec", "Encode or decode one object frame");
  codec->add_option("operation", codec_op, "encode-gps | decode-gps | encode-reported | decode-reported")
      ->required()
      ->check(CLI::IsMember({"encode-gps", "decode-gps", "encode-reported", "decode-reported"}));
  codec->add_option("--hex", codec_hex, "Input bytes as hex")->required();

  std::string poly, crc_hex;
  auto* crc = app.add_subcommand("crc", "CRC-32 of the given bytes");
  crc->add_option("--poly", poly, "Koopman-notation polynomial, e.g. f8c9140a or 9d7f97d6")->required();
  crc->add_option("--hex", crc_hex, "Input bytes as hex (may be empty)")->required();

  std::string dump_region, dump_scenario;
  std::optional<std::uint64_t> dump_cycles;
  bool dump_all = false;
  auto* dpr = app.add_subcommand("dpr", "Dual-ported RAM inspection");
  dpr->require_subcommand(1);
  auto* dump = dpr->add_subcommand("dump", "Hex dump of a region's read buffer");
  dump->add_option("--region", dump_region, "Region name")->required();
  dump->add_option("--scenario", dump_scenario, "Run this scenario first");
  dump->add_option("--cycles", dump_cycles, "Cycles to run before dumping");
  dump->add_flag("--all-buffers", dump_all, "Dump all three buffers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*simulate) return run_simulate(scenario_path, seed, cycles, out_path);
  if (*codec) return run_codec(codec_op, codec_hex);
  if (*crc) return run_crc(poly, crc_hex);
  if (*dump) return run_dpr_dump(dump_region, dump_scenario, dump_cycles, dump_all);
  return kExitConfig;
}
