#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "masslab/config.hpp"
#include "masslab/experiment.hpp"
#include "masslab/io.hpp"

using namespace masslab;
namespace fs = std::filesystem;

namespace {

const char* kSolve = R"(
command: solve
name: small
equation: {family: pme, m: 2, N: 1}
initial: {kind: closed_form, solution: BarenblattPME, mass: 1, t0: 1}
grid: {R: 4, cells: 100}
solver: {dt: 1.0e-3, dt_max: 0.02, outer_bc: zero_flux}
checkpoints: [1.2, 1.5]
reference: true
)";

std::string sweep_text(int workers) {
    return R"(
command: solve
name: sweep
equation: {family: fde, m: 0.5, N: 3}
initial: {kind: bump, height: 1, radius: 1}
grid: {R: 5, h: 0.1}
solver: {dt: 1.0e-3, dt_max: 0.02}
checkpoints: [0.2]
profiles: false
sweep: {axis: R, values: [5, 10, 20], group: {axis: m, values: [0.5, 0.2]}}
workers: )" + std::to_string(workers) + "\n";
}

// workers is part of the config, so the hash line differs
std::string without_hash(const std::string& text) {
    std::string out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (line.rfind("# config_hash=", 0) != 0) out += line + "\n";
    return out;
}

std::string message_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Parse, ShippedConfigs) {
    int n = 0;
    for (const auto& e : fs::directory_iterator(MASSLAB_CONFIG_DIR)) {
        if (e.path().extension() != ".yaml") continue;
        EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
        ++n;
    }
    EXPECT_GE(n, 6);
}

TEST(Parse, Fields) {
    const auto c = parse_config_text(kSolve);
    EXPECT_EQ(c.command, Command::Solve);
    EXPECT_EQ(c.name, "small");
    EXPECT_EQ(c.spec.family, Family::PME_FDE);
    EXPECT_EQ(c.cells, 100);
    EXPECT_DOUBLE_EQ(c.R, 4);
    EXPECT_EQ(c.solver.outer_bc, OuterBC::ZeroFlux);
    ASSERT_EQ(c.solver.checkpoint_times.size(), 2u);
    EXPECT_TRUE(c.reference);
    EXPECT_EQ(c.hash.size(), 16u);
}

TEST(Parse, UnknownKeyNamesLocation) {
    std::string t = kSolve;
    t.replace(t.find("cells: 100"), 10, "cells: 100, foo: 1");
    const auto msg = message_of(t);
    EXPECT_NE(msg.find("unknown key 'foo'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 6"), std::string::npos) << msg;
}

TEST(Parse, Errors) {
    std::string t = kSolve;
    EXPECT_NE(message_of(std::string(t).replace(t.find("m: 2"), 4, "m: two")), "");
    EXPECT_NE(message_of(std::string(t).replace(t.find("checkpoints"), 11, "checkpointz")), "");
    EXPECT_NE(message_of(std::string(t).replace(t.find("family: pme"), 11, "family: xyz")), "");
    EXPECT_NE(message_of(std::string(t).replace(t.find("zero_flux"), 9, "sideways")), "");
    EXPECT_NE(message_of("command: solve\nname: x\n"), "");
    EXPECT_NE(message_of("{ unbalanced"), "");
    EXPECT_THROW(load_config("/nonexistent.yaml"), ValidationError);
}

TEST(Parse, HashTracksContentNotLayout) {
    const auto a = parse_config_text(kSolve);
    const auto b = parse_config_text(std::string("# comment\n") + kSolve);
    std::string t = kSolve;
    const auto c = parse_config_text(t.replace(t.find("cells: 100"), 10, "cells: 101"));
    EXPECT_EQ(a.hash, b.hash);
    EXPECT_NE(a.hash, c.hash);
}

TEST(Run, DeterministicOutput) {
    const auto c = parse_config_text(kSolve);
    const auto a = run_experiment(c), b = run_experiment(c);
    EXPECT_EQ(a.dir, "small-" + c.hash);
    EXPECT_EQ(a.files, b.files);
    ASSERT_TRUE(a.files.count("ledger.csv"));
    ASSERT_TRUE(a.files.count("profile_1.csv"));
    const auto& L = a.files.at("ledger.csv");
    EXPECT_EQ(L.rfind("# masslab 1.0.0\n", 0), 0u);
    EXPECT_NE(L.find("# config_hash=" + c.hash), std::string::npos);
    EXPECT_NE(L.find("\nt,mass,outflux_cum,sup_u,l1_to_reference,clipped_cum\n"), std::string::npos);
}

TEST(Run, SweepIndependentOfWorkers) {
    const auto one = run_experiment(parse_config_text(sweep_text(1)));
    const auto four = run_experiment(parse_config_text(sweep_text(4)));
    ASSERT_EQ(one.files.size(), four.files.size());
    for (const auto& [name, text] : one.files) {
        EXPECT_EQ(without_hash(text), without_hash(four.files.at(name))) << name;
    }
    EXPECT_TRUE(one.files.count("sweep_R_m=0.2.csv"));
    EXPECT_TRUE(one.files.count("sweep_R_m=0.5.csv"));
    EXPECT_NE(one.files.at("ledger_m=0.2_R=10.csv").find("m=0.20000000000000001)"), std::string::npos);
}

TEST(Run, WriteAndReadBack) {
    const auto c = parse_config_text(kSolve);
    const auto out = run_experiment(c);
    const auto dir = write_outputs(out, (fs::temp_directory_path() / "masslab_test_config").string());
    const auto t = read_csv((dir / "ledger.csv").string());
    const auto mass = t.column("mass");
    ASSERT_FALSE(mass.empty());
    EXPECT_NEAR(mass.front(), 1.0, 1e-6);
    EXPECT_NEAR(mass.back(), mass.front(), 1e-9);
    EXPECT_THROW(t.column("nope"), ValidationError);
    const auto svg = svg_plot({{"mass", t.column("t"), mass}}, "mass", "t", "M");
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("polyline"), std::string::npos);
    fs::remove_all(fs::temp_directory_path() / "masslab_test_config");
}
