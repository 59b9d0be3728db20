// qmlp: experiment driver for the QMLP variational classifier toolkit.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qmlp/experiments.hpp"

namespace {

void add_common(CLI::App* cmd, qmlp::ExperimentConfig& cfg) {
    cmd->add_option("--scheme", cfg.scheme, "Scheme name (see `qmlp counts` for the registry)");
    cmd->add_option("--input-size", cfg.input_size, "Image side length k (2, 3 or 4)")
        ->check(CLI::IsMember({2, 3, 4}));
    cmd->add_option("--train-subset", cfg.train_subset, "Training samples (-1 = all)");
    cmd->add_option("--test-subset", cfg.test_subset, "Test samples (-1 = all)");
    cmd->add_option("--epochs", cfg.epochs, "Training epochs");
    cmd->add_option("--batch-size", cfg.batch_size, "Batch size");
    cmd->add_option("--lr", cfg.learning_rate, "ADAM learning rate");
    cmd->add_option("--weight-decay", cfg.weight_decay, "L2 weight decay");
    cmd->add_option("--seeds", cfg.seeds, "Number of seeds");
    cmd->add_option("--seed", cfg.base_seed, "Base seed");
    cmd->add_option("--mnist-dir", cfg.mnist_dir, "Directory with the IDX files")
        ->envname("QMLP_MNIST_DIR");
    cmd->add_option("--out-dir", cfg.out_dir, "Output directory");
    cmd->add_option("--p-bitflip", cfg.p_bitflip, "Bit-flip probability per qubit per gate");
    cmd->add_option("--p-phaseflip", cfg.p_phaseflip, "Phase-flip probability per qubit per gate");
    cmd->add_option("--trajectories", cfg.eval_trajectories, "Monte Carlo trajectories");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"QMLP variational quantum classifier toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value config file; flags override file values");

    qmlp::ExperimentConfig cfg;

    auto* counts = app.add_subcommand("counts", "Print scheme overhead table; fails on mismatch");

    auto* train = app.add_subcommand("train", "Train one scheme and write history + checkpoint");
    add_common(train, cfg);
    std::string checkpoint = "checkpoint.txt";
    train->add_option("--checkpoint", checkpoint, "Checkpoint output path");

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
    add_common(eval, cfg);
    std::string eval_checkpoint;
    bool eval_noisy = false;
    eval->add_option("--checkpoint", eval_checkpoint, "Checkpoint path")->required();
    eval->add_flag("--noisy", eval_noisy, "Evaluate under the configured noise model");

    auto* nonlin = app.add_subcommand("nonlinearity", "Single-qubit RUU response curves");
    add_common(nonlin, cfg);

    auto* encmse = app.add_subcommand("encoding-mse", "Per-pixel error under one injected X");
    add_common(encmse, cfg);
    encmse->add_option("--noise-qubit", cfg.noise_qubit, "Qubit hit by the X insertion (-1 = none)");
    encmse->add_option("--sample-index", cfg.sample_index, "Test image index");

    auto* compare = app.add_subcommand("compare", "Train schemes and compare under noise modes");
    add_common(compare, cfg);
    compare->add_option("--schemes", cfg.schemes, "Schemes to compare (default: all)");

    auto* dw = app.add_subcommand("depth-width", "Vertical vs horizontal layout comparison");
    add_common(dw, cfg);

    auto* sweep = app.add_subcommand("input-sweep", "Accuracy at 2x2, 3x3 and 4x4 inputs");
    add_common(sweep, cfg);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cfg.mnist_dir.empty())
            if (const char* env = std::getenv("QMLP_MNIST_DIR")) cfg.mnist_dir = env;
        const std::string out = cfg.out_dir + "/";

        if (counts->parsed()) {
            return qmlp::cmd_counts(std::cout) ? 0 : 1;
        }
        if (train->parsed()) {
            const auto result = qmlp::cmd_train(cfg, out + "train_history.csv", out + checkpoint);
            std::cout << "best test accuracy " << result.best_acc << " at epoch "
                      << result.best_epoch << "\n";
            return 0;
        }
        if (eval->parsed()) {
            const auto r = qmlp::cmd_eval(cfg, eval_checkpoint, eval_noisy);
            std::cout << "accuracy " << r.accuracy << "\n";
            std::cout << "confusion (rows = true class):\n";
            for (const auto& row : r.confusion) {
                for (int c : row) std::cout << c << " ";
                std::cout << "\n";
            }
            return 0;
        }
        if (nonlin->parsed()) {
            qmlp::cmd_nonlinearity(out + "nonlinearity.csv", cfg);
            return 0;
        }
        if (encmse->parsed()) {
            qmlp::cmd_encoding_mse(out + "encoding_mse.csv", cfg);
            return 0;
        }
        if (compare->parsed()) {
            qmlp::cmd_compare_schemes(out + "compare_schemes.csv", cfg);
            return 0;
        }
        if (dw->parsed()) {
            qmlp::cmd_depth_width(out + "depth_width.csv", cfg);
            return 0;
        }
        if (sweep->parsed()) {
            qmlp::cmd_input_sweep(out + "input_sweep.csv", cfg);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
