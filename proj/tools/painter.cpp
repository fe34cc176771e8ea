// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include <CLI11.hpp>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "painter/checkpoint.hpp"
#include "painter/clients.hpp"
#include "painter/datapipe.hpp"
#include "painter/errors.hpp"
#include "painter/evalbench.hpp"
#include "painter/image_io.hpp"
#include "painter/maskgen.hpp"
#include "painter/model.hpp"
#include "painter/pipeline.hpp"
#include "painter/service.hpp"
#include "painter/synthetic.hpp"
#include "painter/trainer.hpp"

namespace fs = std::filesystem;
using namespace painter;

namespace {

// External model services. --clients-url wins over PAINTER_CLIENTS_URL.
clients::HttpOptions http_options(const std::string& url) {
    clients::HttpOptions options;
    options.base_url = url;
    if (options.base_url.empty()) {
        if (const char* env = std::getenv("PAINTER_CLIENTS_URL")) {
            options.base_url = env;
        }
    }
    if (options.base_url.empty()) {
        throw DomainError("no client endpoint: pass --stub-clients, --clients-url or set PAINTER_CLIENTS_URL");
    }
    return options;
}

void cmd_mask_gen(const fs::path& seg_path, const std::string& kind, std::uint64_t seed, const fs::path& out) {
    const auto seg = io::read_png_mask(seg_path);
    const auto sampled = service::simulate_mask(seg, kind, seed);
    io::write_png(out, sampled.mask);
    std::cout << "kind=" << maskgen::to_string(sampled.kind) << " coverage=" << maskgen::coverage_ratio(sampled.mask)
              << "\n";
}

void cmd_dataset_synth(const fs::path& out, std::size_t count, std::size_t size, std::uint64_t seed) {
    std::vector<datapipe::SourceRecord> records;
    for (auto& scene : synthetic::make_scenes(count, size, size, seed)) {
        records.push_back({scene.id, std::move(scene.image), std::move(scene.seg_mask),
                           datapipe::parse_category(scene.category)});
    }
    datapipe::write_sources(out, records);
    std::cout << "wrote " << records.size() << " source records to " << out.string() << "\n";
}

void cmd_dataset_build(const fs::path& src, const fs::path& out, std::uint64_t seed, bool stub, const std::string& url,
                       double threshold, std::size_t workers) {
    const auto sources = datapipe::load_sources(src);
    datapipe::ShardOptions options;
    options.seed = seed;
    options.threshold = threshold;
    options.workers = workers;

    std::unique_ptr<clients::CaptionerClient> captioner;
    std::unique_ptr<clients::ShortenerClient> shortener;
    std::unique_ptr<clients::SimilarityClient> similarity;
    if (stub) {
        captioner = std::make_unique<clients::ColorCaptioner>();
        shortener = std::make_unique<clients::IdentityShortener>();
        similarity = std::make_unique<clients::ColorSimilarity>();
    } else {
        const auto http = http_options(url);
        captioner = std::make_unique<clients::HttpCaptioner>(http);
        shortener = std::make_unique<clients::HttpShortener>(http);
        similarity = std::make_unique<clients::HttpSimilarity>(http);
    }
    const auto stats =
        datapipe::build_shard(sources, out, {captioner.get(), shortener.get(), similarity.get()}, options);
    std::cout << datapipe::stats_json(stats) << "\n";
}

void cmd_dataset_stats(const fs::path& dir) {
    const auto stats_path = dir / "stats.json";
    if (fs::exists(stats_path)) {
        const auto bytes = io::read_file(stats_path);
        std::cout << std::string(bytes.begin(), bytes.end()) << "\n";
        return;
    }
    const auto bench = datapipe::load_bench(dir);
    nlohmann::ordered_json j;
    j["records"] = bench.records.size();
    for (const auto& [category, count] : bench.category_counts) {
        j["categories"][std::string(datapipe::to_string(category))] = count;
    }
    std::cout << j.dump(2) << "\n";
}

void cmd_base_init(std::size_t text_dim, std::uint64_t seed, const fs::path& out) {
    auto config = model::preset_config("toy");
    config.spec.text_dim = text_dim;
    config.base.seed = seed;
    ckpt::save_base(out, model::resolve_base(config));
    std::cout << "wrote base (text dim " << text_dim << ") to " << out.string() << "\n";
}

struct TrainArgs {
    fs::path data;
    std::string preset = "toy";
    fs::path base;
    trainer::TrainConfig config;
    fs::path out;
    fs::path log;
};

void cmd_train(const TrainArgs& args) {
    auto model = model::build_model(model::preset_config(args.preset, args.base));
    const auto bench = datapipe::load_bench(args.data);
    std::vector<trainer::TrainExample> data;
    for (const auto& r : bench.records) {
        data.push_back({r.id, r.image, r.seg_mask, r.prompt});
    }
    std::ofstream log_file;
    if (!args.log.empty()) {
        log_file.open(args.log);
        if (!log_file) {
            throw IoError("cannot open log " + args.log.string());
        }
    }
    trainer::train(model, data, args.config, [&](const trainer::StepLog& step) {
        const auto line = trainer::to_json_line(step);
        std::cout << line << "\n";
        if (log_file) {
            log_file << line << "\n";
        }
    });
    ckpt::save_checkpoint(args.out, model);
    std::cerr << "saved checkpoint to " << args.out.string() << "\n";
}

void cmd_infer(const fs::path& ckpt_dir, const fs::path& image, const fs::path& mask, pipeline::InpaintRequest request,
               const fs::path& out) {
    auto model = std::make_shared<const model::PainterModel>(ckpt::load_checkpoint(ckpt_dir));
    request.image = io::read_png_rgb(image);
    request.mask = io::read_png_mask(mask);
    const pipeline::PainterPipeline pipe(model);
    const auto result = pipe.inpaint(request);
    io::write_png(out, result.image);
    std::cout << "wrote " << out.string() << " in " << result.seconds << " s\n";
}

void cmd_eval(const fs::path& bench_dir, const fs::path& ckpt_dir, bool stub_model, bool stub, const std::string& url,
              const evalbench::EvalConfig& config, const fs::path& out) {
    const auto bench = datapipe::load_bench(bench_dir);
    std::unique_ptr<pipeline::Inpainter> inpainter;
    if (stub_model) {
        inpainter = std::make_unique<pipeline::IdentityInpainter>();
    } else {
        if (ckpt_dir.empty()) {
            throw DomainError("--ckpt is required unless --stub-model is given");
        }
        inpainter = std::make_unique<pipeline::PainterPipeline>(
            std::make_shared<const model::PainterModel>(ckpt::load_checkpoint(ckpt_dir)));
    }

    std::unique_ptr<clients::SimilarityClient> similarity;
    std::unique_ptr<clients::DetectorClient> detector;
    std::unique_ptr<clients::ImageScorer> reward;
    std::unique_ptr<clients::ImageScorer> aesthetic;
    if (stub) {
        similarity = std::make_unique<clients::ColorSimilarity>();
        detector = std::make_unique<clients::EchoDetector>();
    } else {
        const auto http = http_options(url);
        similarity = std::make_unique<clients::HttpSimilarity>(http);
        detector = std::make_unique<clients::HttpDetector>(http);
        reward = std::make_unique<clients::HttpScorer>(http);
        aesthetic = std::make_unique<clients::HttpScorer>(http);
    }
    const evalbench::EvalClients eval_clients{similarity.get(), detector.get(), reward.get(), aesthetic.get()};
    const auto report = evalbench::run_benchmark(bench.records, *inpainter, eval_clients, config);
    io::write_file(out, evalbench::to_json(report));
    std::cout << evalbench::to_table(report);
}

httplib::Server* g_server = nullptr;

void cmd_serve(const fs::path& ckpt_dir, const std::string& preset, const std::string& host, int port,
               const fs::path& static_dir) {
    std::shared_ptr<const model::PainterModel> model;
    if (!ckpt_dir.empty()) {
        model = std::make_shared<const model::PainterModel>(ckpt::load_checkpoint(ckpt_dir));
    } else {
        model = std::make_shared<const model::PainterModel>(model::build_model(model::preset_config(preset)));
    }
    service::JobService jobs(std::make_shared<pipeline::PainterPipeline>(model));
    service::ServiceOptions options;
    options.preset = model->config().preset;
    options.static_dir = static_dir;

    httplib::Server server;
    service::install_routes(server, jobs, options);
    if (!server.bind_to_port(host, port)) {
        throw IoError("cannot bind " + host + ":" + std::to_string(port));
    }
    g_server = &server;
    std::signal(SIGINT, [](int) { g_server->stop(); });
    std::signal(SIGTERM, [](int) { g_server->stop(); });
    std::cerr << "listening on http://" << host << ":" << port << " (preset " << options.preset << ")\n";
    server.listen_after_bind();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"painter: prompt-aligned inpainting toolkit"};
    app.require_subcommand(1);

    // mask
    auto* mask = app.add_subcommand("mask", "Training mask generation");
    mask->require_subcommand(1);
    auto* mask_gen = mask->add_subcommand("gen", "Sample a mask from a segmentation mask");
    fs::path seg_path, mask_out;
    std::string mask_kind = "mix";
    std::uint64_t mask_seed = 0;
    mask_gen->add_option("--seg", seg_path, "Segmentation mask PNG")->required()->check(CLI::ExistingFile);
    mask_gen->add_option("--kind", mask_kind, "box, irr, mix or seg")
        ->check(CLI::IsMember({"box", "irr", "mix", "seg"}));
    mask_gen->add_option("--seed", mask_seed);
    mask_gen->add_option("--out", mask_out)->required();

    // dataset
    auto* dataset = app.add_subcommand("dataset", "Dataset shards");
    dataset->require_subcommand(1);
    auto* ds_build = dataset->add_subcommand("build", "Build a shard from source records");
    fs::path ds_src, ds_out;
    std::uint64_t ds_seed = 0;
    bool ds_stub = false;
    std::string clients_url;
    double ds_threshold = 0.2;
    std::size_t ds_workers = 0;
    ds_build->add_option("--src", ds_src, "Source directory with manifest.jsonl")->required();
    ds_build->add_option("--out", ds_out)->required();
    ds_build->add_option("--seed", ds_seed);
    ds_build->add_flag("--stub-clients", ds_stub, "Use the offline color stubs");
    ds_build->add_option("--clients-url", clients_url, "Base URL of the model services");
    ds_build->add_option("--threshold", ds_threshold, "Prompt similarity threshold");
    ds_build->add_option("--workers", ds_workers, "Worker threads (0 = all cores)");

    auto* ds_stats = dataset->add_subcommand("stats", "Print shard statistics");
    fs::path stats_dir;
    ds_stats->add_option("dir", stats_dir)->required()->check(CLI::ExistingDirectory);

    auto* ds_synth = dataset->add_subcommand("synth", "Write synthetic source records");
    fs::path synth_out;
    std::size_t synth_count = 64, synth_size = 128;
    std::uint64_t synth_seed = 0;
    ds_synth->add_option("--out", synth_out)->required();
    ds_synth->add_option("--count", synth_count);
    ds_synth->add_option("--size", synth_size);
    ds_synth->add_option("--seed", synth_seed);

    // base
    auto* base = app.add_subcommand("base", "Frozen base models");
    base->require_subcommand(1);
    auto* base_init = base->add_subcommand("init", "Write a seeded toy-shaped base to a directory");
    std::size_t base_text_dim = 32;
    std::uint64_t base_seed = model::kToyBaseSeed;
    fs::path base_out;
    base_init->add_option("--text-dim", base_text_dim, "Context width (768 for sd15-adapter)");
    base_init->add_option("--seed", base_seed);
    base_init->add_option("--out", base_out)->required();

    // train
    auto* train = app.add_subcommand("train", "Train the branch");
    TrainArgs targs;
    train->add_option("--data", targs.data, "Shard directory")->required()->check(CLI::ExistingDirectory);
    train->add_option("--preset", targs.preset)->check(CLI::IsMember({"toy", "sd15-adapter"}));
    train->add_option("--base", targs.base, "Base model directory");
    train->add_option("--beta", targs.config.beta);
    train->add_option("--steps", targs.config.steps);
    train->add_option("--batch", targs.config.batch);
    train->add_option("--lr", targs.config.lr);
    train->add_option("--seed", targs.config.seed);
    train->add_option("--prompt-dropout", targs.config.prompt_dropout);
    train->add_flag("--fixed-batch", targs.config.fixed_batch, "Reuse one batch every step");
    train->add_option("--out", targs.out, "Checkpoint directory")->required();
    train->add_option("--log", targs.log, "Also write the JSON-lines log here");

    // infer
    auto* infer = app.add_subcommand("infer", "Inpaint one image");
    fs::path infer_ckpt, infer_image, infer_mask, infer_out;
    pipeline::InpaintRequest request;
    double infer_w = -1.0;
    infer->add_option("--ckpt", infer_ckpt)->required()->check(CLI::ExistingDirectory);
    infer->add_option("--image", infer_image)->required()->check(CLI::ExistingFile);
    infer->add_option("--mask", infer_mask)->required()->check(CLI::ExistingFile);
    infer->add_option("--prompt", request.prompt)->required();
    infer->add_option("--negative-prompt", request.negative_prompt);
    infer->add_option("--steps", request.steps);
    infer->add_option("--guidance", request.guidance);
    auto* w_opt = infer->add_option("--w", infer_w, "Branch scale (checkpoint default when unset)");
    infer->add_option("--seed", request.seed);
    infer->add_option("--out", infer_out)->required();

    // eval
    auto* eval = app.add_subcommand("eval", "Run the benchmark");
    fs::path eval_bench, eval_ckpt, eval_out = "report.json";
    bool eval_stub = false, eval_stub_model = false;
    evalbench::EvalConfig eval_config;
    eval->add_option("--bench", eval_bench)->required()->check(CLI::ExistingDirectory);
    eval->add_option("--ckpt", eval_ckpt);
    eval->add_option("--seed", eval_config.seed);
    eval->add_option("--steps", eval_config.steps);
    eval->add_option("--guidance", eval_config.guidance);
    eval->add_flag("--stub-clients", eval_stub, "Use the offline stubs");
    eval->add_flag("--stub-model", eval_stub_model, "Score the unedited inputs instead of a model");
    eval->add_option("--clients-url", clients_url, "Base URL of the model services");
    eval->add_option("--out", eval_out);

    // serve
    auto* serve = app.add_subcommand("serve", "HTTP service");
    fs::path serve_ckpt, serve_static;
    std::string serve_preset = "toy", serve_host = "127.0.0.1";
    int serve_port = 8787;
    serve->add_option("--ckpt", serve_ckpt, "Checkpoint (an untrained toy model when unset)");
    serve->add_option("--preset", serve_preset);
    serve->add_option("--host", serve_host);
    serve->add_option("--port", serve_port);
    serve->add_option("--static", serve_static, "Directory served at /")->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (mask_gen->parsed()) {
            cmd_mask_gen(seg_path, mask_kind, mask_seed, mask_out);
        } else if (ds_build->parsed()) {
            cmd_dataset_build(ds_src, ds_out, ds_seed, ds_stub, clients_url, ds_threshold, ds_workers);
        } else if (ds_stats->parsed()) {
            cmd_dataset_stats(stats_dir);
        } else if (ds_synth->parsed()) {
            cmd_dataset_synth(synth_out, synth_count, synth_size, synth_seed);
        } else if (base_init->parsed()) {
            cmd_base_init(base_text_dim, base_seed, base_out);
        } else if (train->parsed()) {
            cmd_train(targs);
        } else if (infer->parsed()) {
            if (w_opt->count() > 0) {
                request.w = infer_w;
            }
            cmd_infer(infer_ckpt, infer_image, infer_mask, request, infer_out);
        } else if (eval->parsed()) {
            cmd_eval(eval_bench, eval_ckpt, eval_stub_model, eval_stub, clients_url, eval_config, eval_out);
        } else if (serve->parsed()) {
            cmd_serve(serve_ckpt, serve_preset, serve_host, serve_port, serve_static);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
