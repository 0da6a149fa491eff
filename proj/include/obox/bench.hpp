#pragma once

#include <cstdint>
#include <string>

namespace obox {

enum class BenchOp { Iou, ArIou, Nms, RoiPool };

/// Throws ConfigError for an unknown name.
BenchOp parse_bench_op(const std::string& name);
const char* bench_op_name(BenchOp op);

struct BenchResult {
    BenchOp op = BenchOp::Iou;
    std::size_t n = 0;
    double seconds = 0.0;
    double ops_per_sec = 0.0;
};

/// Times n operations on seeded random inputs generated up front.
///  - Iou / ArIou: one evaluation on an overlapping box pair;
///  - Nms: one run over 100 boxes;
///  - RoiPool: one 14x14 oriented pooling from a 256x256 map.
BenchResult run_bench(BenchOp op, std::size_t n, uint64_t seed);

}  // namespace obox
