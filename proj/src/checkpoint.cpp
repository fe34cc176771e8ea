// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/checkpoint.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "painter/errors.hpp"
#include "painter/image_io.hpp"

namespace painter::ckpt {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'P', 'N', 'T', 'R', 'P', 'R', 'M', '1'};
constexpr const char* kCheckpointFormat = "painter-checkpoint/1";
constexpr const char* kBaseFormat = "painter-base/1";

static_assert(std::endian::native == std::endian::little, "params.bin assumes a little-endian host");

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& bytes, std::string origin) : m_bytes(bytes), m_origin(std::move(origin)) {}

    template <typename T>
    T get() {
        T value;
        take(&value, sizeof(T));
        return value;
    }

    void take(void* dst, std::size_t n) {
        if (n > m_bytes.size() - m_pos) {
            throw SchemaError("truncated parameter archive " + m_origin);
        }
        std::memcpy(dst, m_bytes.data() + m_pos, n);
        m_pos += n;
    }

    bool done() const { return m_pos == m_bytes.size(); }

private:
    const std::vector<std::uint8_t>& m_bytes;
    std::string m_origin;
    std::size_t m_pos = 0;
};

std::vector<std::uint8_t> serialize(const branch::ParamSet& params) {
    std::vector<std::uint8_t> out(kMagic, kMagic + 8);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& [name, tensor] : params) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
        put<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
        for (std::size_t d : tensor.shape()) {
            put<std::uint64_t>(out, d);
        }
        const auto* p = reinterpret_cast<const std::uint8_t*>(tensor.data());
        out.insert(out.end(), p, p + tensor.numel() * sizeof(double));
    }
    return out;
}

json spec_to_json(const branch::DenoiserSpec& spec) {
    json layers = json::array();
    for (const auto& layer : spec.layers) {
        layers.push_back({{"width", layer.width}, {"scale", layer.scale}, {"attention", layer.attention}});
    }
    return {{"in_channels", spec.in_channels}, {"out_channels", spec.out_channels}, {"stem_width", spec.stem_width},
            {"layers", layers},           {"heads", spec.heads},               {"head_dim", spec.head_dim},
            {"text_dim", spec.text_dim},  {"token_length", spec.token_length}, {"time_dim", spec.time_dim},
            {"latent_height", spec.latent_height}, {"latent_width", spec.latent_width}};
}

branch::DenoiserSpec spec_from_json(const json& j) {
    branch::DenoiserSpec spec;
    spec.in_channels = j.at("in_channels").get<std::size_t>();
    spec.out_channels = j.at("out_channels").get<std::size_t>();
    spec.stem_width = j.at("stem_width").get<std::size_t>();
    spec.layers.clear();
    for (const auto& layer : j.at("layers")) {
        spec.layers.push_back({layer.at("width").get<std::size_t>(), layer.at("scale").get<std::size_t>(),
                               layer.at("attention").get<bool>()});
    }
    spec.heads = j.at("heads").get<std::size_t>();
    spec.head_dim = j.at("head_dim").get<std::size_t>();
    spec.text_dim = j.at("text_dim").get<std::size_t>();
    spec.token_length = j.at("token_length").get<std::size_t>();
    spec.time_dim = j.at("time_dim").get<std::size_t>();
    spec.latent_height = j.at("latent_height").get<std::size_t>();
    spec.latent_width = j.at("latent_width").get<std::size_t>();
    return spec;
}

json read_json(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    io::write_file(path, j.dump(2) + "\n");
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
}

}  // namespace

void save_params(const std::filesystem::path& path, const branch::ParamSet& params) {
    io::write_file(path, serialize(params));
}

branch::ParamSet load_params(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    Reader in(bytes, path.string());
    char magic[8];
    in.take(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0) {
        throw SchemaError(path.string() + " is not a parameter archive");
    }
    branch::ParamSet params;
    const auto count = in.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name(in.get<std::uint32_t>(), '\0');
        in.take(name.data(), name.size());
        nn::Shape shape(in.get<std::uint32_t>());
        for (auto& d : shape) {
            d = in.get<std::uint64_t>();
        }
        if (nn::shape_numel(shape) > (bytes.size() / sizeof(double))) {
            throw SchemaError("tensor '" + name + "' larger than archive " + path.string());
        }
        nn::Tensor tensor(shape);
        in.take(tensor.data(), tensor.numel() * sizeof(double));
        if (!params.emplace(name, std::move(tensor)).second) {
            throw SchemaError("duplicate tensor '" + name + "' in " + path.string());
        }
    }
    if (!in.done()) {
        throw SchemaError("trailing bytes in " + path.string());
    }
    return params;
}

std::string params_digest(const branch::ParamSet& params) {
    const auto bytes = serialize(params);
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex += kHex[md[i] >> 4];
        hex += kHex[md[i] & 15];
    }
    return hex;
}

void save_base(const std::filesystem::path& dir, const branch::BaseModel& base) {
    check_params(base.spec, *base.params);
    ensure_dir(dir);
    write_json(dir / "base.json", {{"format", kBaseFormat}, {"spec", spec_to_json(base.spec)}});
    save_params(dir / "params.bin", *base.params);
}

branch::BaseModel load_base(const std::filesystem::path& dir) {
    const json j = read_json(dir / "base.json");
    branch::DenoiserSpec spec;
    try {
        if (j.at("format") != kBaseFormat) {
            throw SchemaError("unsupported base format in " + dir.string());
        }
        spec = spec_from_json(j.at("spec"));
        spec.validate();
    } catch (const json::exception& e) {
        throw SchemaError(dir.string() + "/base.json: " + e.what());
    } catch (const ShapeError& e) {
        throw SchemaError(dir.string() + "/base.json: " + e.what());
    }
    auto params = load_params(dir / "params.bin");
    try {
        check_params(spec, params);
    } catch (const ShapeError& e) {
        throw SchemaError(dir.string() + ": " + e.what());
    }
    return {spec, std::make_shared<const branch::ParamSet>(std::move(params))};
}

void save_checkpoint(const std::filesystem::path& dir, const model::PainterModel& model) {
    const auto& config = model.config();
    const auto& br = model.branch();
    json taps = json::array();
    for (const auto& tap : br.taps) {
        taps.push_back({{"site", branch::to_string(tap.site)},
                        {"index", tap.index},
                        {"in_width", tap.in_width},
                        {"out_width", tap.out_width}});
    }
    json base;
    if (config.base.kind == model::BaseRef::Kind::seed) {
        base = {{"kind", "seed"}, {"seed", config.base.seed}};
    } else {
        base = {{"kind", "path"}, {"path", config.base.path.generic_string()}};
    }
    const json j = {
        {"format", kCheckpointFormat},
        {"preset", config.preset},
        {"spec", spec_to_json(model.base().spec)},
        {"text", {{"vocab_size", config.text.vocab_size}, {"length", config.text.length}, {"dim", config.text.dim},
                  {"seed", config.text.seed}}},
        {"codec_factor", config.codec_factor},
        {"schedule", {{"kind", "scaled_linear"}, {"steps", config.schedule.steps},
                      {"beta_start", config.schedule.beta_start}, {"beta_end", config.schedule.beta_end}}},
        {"w_default", config.w_default},
        {"injection", config.injection == branch::AttnInjection::post ? "post" : "pre"},
        {"base", base},
        {"base_digest", params_digest(*model.base().params)},
        {"taps", taps},
    };
    branch::ParamSet all;
    for (const auto& [name, tensor] : br.params) {
        all.emplace("branch." + name, tensor);
    }
    for (const auto& [name, tensor] : br.tap_params) {
        all.emplace(name, tensor);
    }
    ensure_dir(dir);
    write_json(dir / "painter.json", j);
    save_params(dir / "params.bin", all);
}

model::PainterModel load_checkpoint(const std::filesystem::path& dir) {
    const json j = read_json(dir / "painter.json");
    model::ModelConfig config;
    branch::DenoiserSpec stored_spec;
    std::vector<branch::ControlPointTap> taps;
    std::string digest;
    try {
        if (j.at("format") != kCheckpointFormat) {
            throw SchemaError("unsupported checkpoint format in " + dir.string());
        }
        config.preset = j.at("preset").get<std::string>();
        stored_spec = spec_from_json(j.at("spec"));
        stored_spec.validate();
        config.spec = stored_spec;
        const auto& text = j.at("text");
        config.text = {text.at("vocab_size").get<std::size_t>(), text.at("length").get<std::size_t>(),
                       text.at("dim").get<std::size_t>(), text.at("seed").get<std::uint64_t>()};
        config.codec_factor = j.at("codec_factor").get<std::size_t>();
        const auto& sched = j.at("schedule");
        if (sched.at("kind") != "scaled_linear") {
            throw SchemaError("unsupported schedule in " + dir.string());
        }
        config.schedule = {sched.at("steps").get<std::size_t>(), sched.at("beta_start").get<double>(),
                           sched.at("beta_end").get<double>()};
        config.w_default = j.at("w_default").get<double>();
        const auto injection = j.at("injection").get<std::string>();
        if (injection != "post" && injection != "pre") {
            throw SchemaError("unknown injection mode '" + injection + "'");
        }
        config.injection = injection == "post" ? branch::AttnInjection::post : branch::AttnInjection::pre;
        const auto& base = j.at("base");
        if (base.at("kind") == "seed") {
            config.base = {model::BaseRef::Kind::seed, base.at("seed").get<std::uint64_t>(), {}};
        } else if (base.at("kind") == "path") {
            std::filesystem::path path = base.at("path").get<std::string>();
            config.base = {model::BaseRef::Kind::path, 0, path.is_relative() ? dir / path : path};
        } else {
            throw SchemaError("unknown base kind in " + dir.string());
        }
        digest = j.at("base_digest").get<std::string>();
        for (const auto& tap : j.at("taps")) {
            taps.push_back({branch::parse_tap_site(tap.at("site").get<std::string>()), tap.at("index").get<std::size_t>(),
                            tap.at("in_width").get<std::size_t>(), tap.at("out_width").get<std::size_t>()});
        }
    } catch (const json::exception& e) {
        throw SchemaError(dir.string() + "/painter.json: " + e.what());
    } catch (const ShapeError& e) {
        throw SchemaError(dir.string() + "/painter.json: " + e.what());
    } catch (const DomainError& e) {
        throw SchemaError(dir.string() + "/painter.json: " + e.what());
    }

    auto base = model::resolve_base(config);
    if (base.spec != stored_spec) {
        throw SchemaError("base spec differs from the checkpoint spec in " + dir.string());
    }
    if (ckpt::params_digest(*base.params) != digest) {
        throw SchemaError("base parameters differ from those the checkpoint was trained on");
    }

    branch::BranchModel br;
    br.spec = stored_spec;
    br.spec.in_channels = branch::kBranchInputChannels;
    br.taps = std::move(taps);
    for (auto& [name, tensor] : load_params(dir / "params.bin")) {
        if (name.rfind("branch.", 0) == 0) {
            br.params.emplace(name.substr(7), std::move(tensor));
        } else if (name.rfind("tap.", 0) == 0) {
            br.tap_params.emplace(name, std::move(tensor));
        } else {
            throw SchemaError("unexpected tensor '" + name + "' in " + dir.string());
        }
    }
    try {
        return model::PainterModel(std::move(config), std::move(base), std::move(br));
    } catch (const ShapeError& e) {
        throw SchemaError(dir.string() + ": " + e.what());
    } catch (const MissingTapError& e) {
        throw SchemaError(dir.string() + ": " + e.what());
    }
}

}  // namespace painter::ckpt
