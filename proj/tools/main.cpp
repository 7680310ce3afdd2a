#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "runner.hpp"
#include "yudovich/parallel.hpp"

namespace fs = std::filesystem;
using namespace yudovich::cli;

int main(int argc, char** argv) {
    CLI::App app{"Yudovich-class Euler flows: point vortices, flow maps, moduli, Newton potentials"};
    app.require_subcommand(1);

    std::vector<std::string> scenarios;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    double tol = 0.0;

    const char* runners[] = {"germ", "modulus", "green", "vortices", "flow", "jets", "potential"};
    for (const char* name : runners) {
        auto* sub = app.add_subcommand(name, std::string("run a ") + name + " scenario");
        sub->add_option("--scenario", scenarios, "scenario JSON (repeat for a batch, run concurrently)")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "override the scenario seed");
        sub->add_option("--tol", tol, "override the scenario tolerance");
    }
    auto* sc = app.add_subcommand("selfcheck", "fast invariant suite");
    bool disk_only = false;
    int images = 0;
    sc->add_flag("--disk-only", disk_only, "report annulus checks as skipped");
    sc->add_option("--fault-annulus-images", images, "test hook: truncate the annulus image series")->check(CLI::NonNegativeNumber);

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();

    if (sub->get_name() == "selfcheck") {
        int failed = 0;
        for (const auto& c : self_check({disk_only, images})) {
            const char* tag = c.state == CheckLine::State::pass ? "PASS" : c.state == CheckLine::State::fail ? "FAIL" : "SKIP";
            std::printf("%s  %-32s %s\n", tag, c.name.c_str(), c.detail.c_str());
            failed += c.state == CheckLine::State::fail;
        }
        return failed ? numerical_failure : ok;
    }

    Overrides ov;
    if (sub->count("--seed")) ov.seed = seed;
    if (sub->count("--tol")) ov.tol = tol;
    std::vector<int> codes(scenarios.size(), ok);
    std::vector<std::string> messages(scenarios.size());
    yudovich::parallel_for(scenarios.size(), [&](std::size_t i) {
        const std::string dir = scenarios.size() == 1 ? out_dir : (fs::path(out_dir) / fs::path(scenarios[i]).stem()).string();
        codes[i] = run_scenario(sub->get_name(), scenarios[i], dir, ov, &messages[i]);
    });
    for (std::size_t i = 0; i < scenarios.size(); ++i)
        std::fprintf(codes[i] ? stderr : stdout, "%s: exit %d (%s)\n", scenarios[i].c_str(), codes[i], messages[i].c_str());
    return *std::max_element(codes.begin(), codes.end());
}
