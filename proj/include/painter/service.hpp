// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "painter/maskgen.hpp"
#include "painter/pipeline.hpp"

namespace httplib {
class Server;
}

namespace painter::service {

enum class JobState { queued, running, done, failed };
std::string_view to_string(JobState state);

struct Job {
    std::string id;
    JobState state = JobState::queued;
    pipeline::InpaintRequest request;
    std::optional<pipeline::InpaintResult> result;
    std::string error;
};

/// In-memory job table with a single inference worker consuming in FIFO
/// order. Holds at most `capacity` jobs; the oldest finished job is evicted
/// to make room. Jobs vanish when the service is destroyed.
class JobService {
public:
    explicit JobService(std::shared_ptr<const pipeline::Inpainter> inpainter, std::size_t capacity = 100);
    ~JobService();
    JobService(const JobService&) = delete;
    JobService& operator=(const JobService&) = delete;

    /// Validates and enqueues. Throws ShapeError/DomainError for bad
    /// requests and RangeError when every slot holds an unfinished job.
    std::string submit(pipeline::InpaintRequest request);

    std::optional<Job> get(const std::string& id) const;

    /// Blocks until the job finishes or the timeout passes; returns the last state seen.
    std::optional<Job> wait(const std::string& id, std::chrono::milliseconds timeout) const;

    std::size_t size() const;

private:
    void run();

    std::shared_ptr<const pipeline::Inpainter> m_inpainter;
    std::size_t m_capacity;
    mutable std::mutex m_mutex;
    mutable std::condition_variable m_changed;
    std::map<std::string, Job> m_jobs;
    std::deque<std::string> m_order;  // submission order, for eviction
    std::deque<std::string> m_queue;
    std::uint64_t m_next_id = 0;
    bool m_stopping = false;
    std::thread m_worker;
};

struct ServiceOptions {
    std::string preset = "toy";
    maskgen::MaskGenParams mask;
    std::filesystem::path static_dir;  // served at / when set
};

/// Installs GET /api/health, POST /api/inpaint, GET /api/jobs/{id} and
/// POST /api/mask/simulate on `server`.
void install_routes(httplib::Server& server, JobService& jobs, const ServiceOptions& options);

/// Generates a preview mask. kind ∈ {box, irr, seg, mix}; mix draws k from
/// the seed. Throws DomainError for other kinds and EmptyMaskError when a
/// box is requested for an empty mask.
maskgen::SampledMask simulate_mask(const BinaryMask& seg, const std::string& kind, std::uint64_t seed,
                                   const maskgen::MaskGenParams& params = {});

}  // namespace painter::service
