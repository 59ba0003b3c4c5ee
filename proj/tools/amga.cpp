#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "amga/cli/commands.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv)
{
    CLI::App app{"AMGA adversarial attack toolkit"};
    app.require_subcommand(1);
    std::string workdir = ".";
    app.add_option("--workdir", workdir, "Base directory for every relative path")->capture_default_str();

    std::string config_path;
    auto add_run = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON run configuration (defaults when omitted)");
        return sub;
    };
    auto* zoo_train = add_run("zoo-train", "Train the model zoo");
    auto* attack = add_run("attack", "Attack validation images and score every model");
    auto* track_eval = add_run("track-eval", "Track the sequence suite under each condition");
    auto* ablate = add_run("ablate", "Component ablation and sigma sweep on the sequence suite");

    std::string in_dir, out_dir;
    auto* report = app.add_subcommand("report", "Success and precision curves from track-eval output");
    report->add_option("--in", in_dir, "track-eval output directory")->required();
    report->add_option("--out", out_dir, "Directory for the curve CSVs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const fs::path wd(workdir);
        if (report->parsed()) {
            amga::cli::cmd_report(amga::cli::resolve(wd, in_dir), amga::cli::resolve(wd, out_dir));
            return 0;
        }
        const amga::cli::RunConfig config = config_path.empty()
                                                ? amga::cli::RunConfig{}
                                                : amga::cli::load_run_config(amga::cli::resolve(wd, config_path));
        config.validate();
        if (zoo_train->parsed()) amga::cli::cmd_zoo_train(config, wd);
        else if (attack->parsed()) amga::cli::cmd_attack(config, wd);
        else if (track_eval->parsed()) amga::cli::cmd_track_eval(config, wd);
        else if (ablate->parsed()) amga::cli::cmd_ablate(config, wd);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "amga: " << e.what() << '\n';
        return amga::cli::exit_code_for(e);
    }
}
