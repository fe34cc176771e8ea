// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/service.hpp"

#include <httplib.h>

#include <cstdio>
#include <json.hpp>

#include "painter/errors.hpp"
#include "painter/image_io.hpp"

namespace painter::service {

namespace {

using nlohmann::json;

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message) {
    reply(res, status, {{"error", message}});
}

json settings_json(const pipeline::InpaintSettings& s) {
    return {{"prompt", s.prompt}, {"negative_prompt", s.negative_prompt}, {"steps", s.steps},
            {"guidance", s.guidance}, {"w", s.w},                         {"seed", s.seed}};
}

json job_json(const Job& job) {
    const auto& r = job.request;
    json j = {{"id", job.id},
              {"state", std::string(to_string(job.state))},
              {"request",
               {{"prompt", r.prompt},
                {"negative_prompt", r.negative_prompt},
                {"steps", r.steps},
                {"guidance", r.guidance},
                {"w", r.w ? json(*r.w) : json(nullptr)},
                {"seed", r.seed},
                {"height", r.image.height()},
                {"width", r.image.width()}}}};
    if (job.result) {
        j["result"] = {{"image", io::base64_encode(io::encode_png(job.result->image))},
                       {"seconds", job.result->seconds},
                       {"settings", settings_json(job.result->settings)}};
    }
    if (job.state == JobState::failed) {
        j["error"] = job.error;
    }
    return j;
}

json parse_body(const httplib::Request& req) {
    json body = json::parse(req.body);
    if (!body.is_object()) {
        throw DomainError("request body must be a JSON object");
    }
    return body;
}

std::string required_string(const json& body, const char* key) {
    if (!body.contains(key) || !body.at(key).is_string()) {
        throw DomainError(std::string("missing string field '") + key + "'");
    }
    return body.at(key).get<std::string>();
}

}  // namespace

std::string_view to_string(JobState state) {
    switch (state) {
    case JobState::queued:
        return "queued";
    case JobState::running:
        return "running";
    case JobState::done:
        return "done";
    case JobState::failed:
        return "failed";
    }
    return "unknown";
}

JobService::JobService(std::shared_ptr<const pipeline::Inpainter> inpainter, std::size_t capacity)
    : m_inpainter(std::move(inpainter)), m_capacity(capacity) {
    if (!m_inpainter) {
        throw ModelNotLoadedError("job service needs an inpainter");
    }
    if (m_capacity == 0) {
        throw DomainError("job capacity must be positive");
    }
    m_worker = std::thread([this] { run(); });
}

JobService::~JobService() {
    {
        std::lock_guard lock(m_mutex);
        m_stopping = true;
    }
    m_changed.notify_all();
    m_worker.join();
}

std::string JobService::submit(pipeline::InpaintRequest request) {
    request.validate();
    std::lock_guard lock(m_mutex);
    if (m_jobs.size() >= m_capacity) {
        const auto finished = std::find_if(m_order.begin(), m_order.end(), [&](const std::string& id) {
            const auto state = m_jobs.at(id).state;
            return state == JobState::done || state == JobState::failed;
        });
        if (finished == m_order.end()) {
            throw RangeError("job table is full");
        }
        m_jobs.erase(*finished);
        m_order.erase(finished);
    }
    char id[32];
    std::snprintf(id, sizeof id, "job-%06llu", static_cast<unsigned long long>(++m_next_id));
    m_jobs[id] = Job{id, JobState::queued, std::move(request), std::nullopt, {}};
    m_order.push_back(id);
    m_queue.push_back(id);
    m_changed.notify_all();
    return id;
}

std::optional<Job> JobService::get(const std::string& id) const {
    std::lock_guard lock(m_mutex);
    const auto it = m_jobs.find(id);
    if (it == m_jobs.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<Job> JobService::wait(const std::string& id, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(m_mutex);
    m_changed.wait_for(lock, timeout, [&] {
        const auto it = m_jobs.find(id);
        return it == m_jobs.end() || it->second.state == JobState::done || it->second.state == JobState::failed;
    });
    const auto it = m_jobs.find(id);
    if (it == m_jobs.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t JobService::size() const {
    std::lock_guard lock(m_mutex);
    return m_jobs.size();
}

void JobService::run() {
    std::unique_lock lock(m_mutex);
    for (;;) {
        m_changed.wait(lock, [&] { return m_stopping || !m_queue.empty(); });
        if (m_stopping) {
            return;
        }
        const std::string id = m_queue.front();
        m_queue.pop_front();
        Job& job = m_jobs.at(id);
        job.state = JobState::running;
        const pipeline::InpaintRequest request = job.request;
        m_changed.notify_all();

        lock.unlock();
        std::optional<pipeline::InpaintResult> result;
        std::string error;
        try {
            result = m_inpainter->inpaint(request);
        } catch (const std::exception& e) {
            error = e.what();
        }
        lock.lock();

        // Running jobs are never evicted, so the entry is still present.
        Job& finished = m_jobs.at(id);
        if (result) {
            finished.result = std::move(result);
            finished.state = JobState::done;
        } else {
            finished.error = error.empty() ? "inpainting failed" : error;
            finished.state = JobState::failed;
        }
        m_changed.notify_all();
    }
}

maskgen::SampledMask simulate_mask(const BinaryMask& seg, const std::string& kind, std::uint64_t seed,
                                   const maskgen::MaskGenParams& params) {
    maskgen::Rng rng(seed);
    if (kind == "mix") {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        return maskgen::sample_mask(seg, unit(rng), params, rng);
    }
    if (kind != "box" && kind != "irr" && kind != "seg") {
        throw DomainError("unknown mask kind '" + kind + "'");
    }
    const auto k = maskgen::parse_kind(kind);
    switch (k) {
    case maskgen::MaskKind::box:
        return {maskgen::gen_box_mask(seg, params, rng), k};
    case maskgen::MaskKind::irr:
        return {maskgen::gen_irregular_mask(seg, params, rng), k};
    case maskgen::MaskKind::seg:
        break;
    }
    return {seg, maskgen::MaskKind::seg};
}

void install_routes(httplib::Server& server, JobService& jobs, const ServiceOptions& options) {
    server.Get("/api/health", [preset = options.preset](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, {{"status", "ok"}, {"preset", preset}});
    });

    server.Post("/api/inpaint", [&jobs](const httplib::Request& req, httplib::Response& res) {
        try {
            const json body = parse_body(req);
            pipeline::InpaintRequest r;
            r.image = io::decode_png_rgb(io::base64_decode(required_string(body, "image")));
            r.mask = io::decode_png_mask(io::base64_decode(required_string(body, "mask")));
            r.prompt = body.value("prompt", std::string());
            r.negative_prompt = body.value("negative_prompt", std::string());
            r.steps = body.value("steps", r.steps);
            r.guidance = body.value("guidance", r.guidance);
            if (body.contains("w") && !body.at("w").is_null()) {
                r.w = body.at("w").get<double>();
            }
            r.seed = body.value("seed", r.seed);
            reply(res, 200, {{"job_id", jobs.submit(std::move(r))}});
        } catch (const json::exception& e) {
            fail(res, 400, e.what());
        } catch (const RangeError& e) {
            fail(res, 503, e.what());
        } catch (const Error& e) {
            fail(res, 400, e.what());
        }
    });

    server.Get(R"(/api/jobs/([A-Za-z0-9_-]+))", [&jobs](const httplib::Request& req, httplib::Response& res) {
        const auto job = jobs.get(req.matches[1]);
        if (!job) {
            fail(res, 404, "no such job");
            return;
        }
        reply(res, 200, job_json(*job));
    });

    server.Post("/api/mask/simulate", [params = options.mask](const httplib::Request& req, httplib::Response& res) {
        try {
            const json body = parse_body(req);
            const auto seg = io::decode_png_mask(io::base64_decode(required_string(body, "seg")));
            const auto kind = required_string(body, "kind");
            const auto seed = body.value("seed", std::uint64_t{0});
            const auto out = simulate_mask(seg, kind, seed, params);
            reply(res, 200,
                  {{"mask", io::base64_encode(io::encode_png(out.mask))}, {"kind", std::string(maskgen::to_string(out.kind))}});
        } catch (const json::exception& e) {
            fail(res, 400, e.what());
        } catch (const EmptyMaskError& e) {
            fail(res, 422, e.what());
        } catch (const Error& e) {
            fail(res, 400, e.what());
        }
    });

    if (!options.static_dir.empty() && !server.set_mount_point("/", options.static_dir.string())) {
        throw IoError("cannot serve static files from " + options.static_dir.string());
    }
}

}  // namespace painter::service
