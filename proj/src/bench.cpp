#include "obox/bench.hpp"

#include <chrono>
#include <vector>

#include "obox/errors.hpp"
#include "obox/geometry.hpp"
#include "obox/nms.hpp"
#include "obox/rng.hpp"
#include "obox/roi.hpp"

namespace obox {

namespace {

constexpr std::size_t kNmsBoxes = 100;
constexpr int kRoiMapSize = 256;

OrientedBox random_box(Rng& rng, double extent) {
    return {rng.uniform(0.0, extent), rng.uniform(0.0, extent), rng.uniform(2.0, 50.0), rng.uniform(2.0, 50.0),
            rng.uniform(-kPi, kPi)};
}

// Second box of a pair, centered close enough to the first to overlap.
OrientedBox nearby_box(Rng& rng, const OrientedBox& a) {
    OrientedBox b = random_box(rng, 0.0);
    b.r = a.r + rng.uniform(-20.0, 20.0);
    b.c = a.c + rng.uniform(-20.0, 20.0);
    return b;
}

// Keeps the optimizer from discarding benchmarked work.
volatile double g_sink = 0.0;

}  // namespace

BenchOp parse_bench_op(const std::string& name) {
    if (name == "iou") return BenchOp::Iou;
    if (name == "ariou") return BenchOp::ArIou;
    if (name == "nms") return BenchOp::Nms;
    if (name == "roipool") return BenchOp::RoiPool;
    throw ConfigError("unknown bench op '" + name + "' (expected iou, ariou, nms or roipool)");
}

const char* bench_op_name(BenchOp op) {
    switch (op) {
        case BenchOp::Iou:
            return "iou";
        case BenchOp::ArIou:
            return "ariou";
        case BenchOp::Nms:
            return "nms";
        case BenchOp::RoiPool:
            return "roipool";
    }
    return "?";
}

BenchResult run_bench(BenchOp op, std::size_t n, uint64_t seed) {
    if (n == 0) throw ConfigError("bench: n must be >= 1");
    Rng rng(seed);
    BenchResult result;
    result.op = op;
    result.n = n;
    double acc = 0.0;
    using Clock = std::chrono::steady_clock;
    Clock::time_point start;

    switch (op) {
        case BenchOp::Iou:
        case BenchOp::ArIou: {
            const std::size_t pool = std::min<std::size_t>(n, 4096);
            std::vector<std::pair<OrientedBox, OrientedBox>> pairs;
            for (std::size_t i = 0; i < pool; ++i) {
                const OrientedBox a = random_box(rng, 512.0);
                pairs.emplace_back(a, nearby_box(rng, a));
            }
            start = Clock::now();
            for (std::size_t i = 0; i < n; ++i) {
                const auto& [a, b] = pairs[i % pool];
                acc += op == BenchOp::Iou ? iou(a, b) : ar_iou(a, b);
            }
            break;
        }
        case BenchOp::Nms: {
            const std::size_t pool = std::min<std::size_t>(n, 64);
            std::vector<std::vector<Detection>> inputs(pool);
            for (auto& dets : inputs) {
                for (std::size_t k = 0; k < kNmsBoxes; ++k) {
                    dets.push_back({random_box(rng, 512.0), rng.uniform(), static_cast<int>(rng.below(3))});
                }
            }
            NmsConfig cfg;
            cfg.min_score = 0.0;
            cfg.max_pre_nms = kNmsBoxes;
            cfg.max_post_nms = kNmsBoxes;
            start = Clock::now();
            for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(nms_indices(inputs[i % pool], cfg).size());
            break;
        }
        case BenchOp::RoiPool: {
            FeatureMap fm(1, kRoiMapSize, kRoiMapSize);
            for (double& v : fm.data) v = rng.uniform();
            const std::size_t pool = std::min<std::size_t>(n, 1024);
            std::vector<OrientedBox> boxes;
            for (std::size_t i = 0; i < pool; ++i) boxes.push_back(random_box(rng, kRoiMapSize));
            start = Clock::now();
            for (std::size_t i = 0; i < n; ++i) {
                acc += roi_pool(fm, boxes[i % pool], kMaskPoolSize, kMaskPoolSize).data[0];
            }
            break;
        }
    }
    result.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    g_sink = acc;
    result.ops_per_sec = result.seconds > 0.0 ? static_cast<double>(n) / result.seconds : 0.0;
    return result;
}

}  // namespace obox
