#include "obox/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "obox/errors.hpp"

namespace obox {

void DlwConfig::validate() const {
    if (!(ilw_box <= flw_box && ilw_cls <= flw_cls)) throw ConfigError("dlw: initial weights must not exceed final weights");
    if (n_dlw < 1) throw ConfigError("dlw: n_dlw must be >= 1");
    if (!(delta_tl_rpn > 0.0 && delta_tl_rpn < 1.0)) throw ConfigError("dlw: delta_tl_rpn must lie in (0, 1)");
    if (!(i_tl_rpn > 0.0)) throw ConfigError("dlw: initial RPN loss threshold must be positive");
    if (window < 1) throw ConfigError("dlw: window must be >= 1");
}

DlwState DlwState::initial(const DlwConfig& cfg) {
    cfg.validate();
    DlwState s;
    s.lw_box = cfg.ilw_box;
    s.lw_cls = cfg.ilw_cls;
    s.tl_rpn = cfg.i_tl_rpn;
    return s;
}

DlwStep observe(const DlwState& state, const DlwConfig& cfg, double rpn_loss) {
    if (!std::isfinite(rpn_loss) || rpn_loss < 0.0) {
        throw DomainError("dlw: RPN loss must be finite and non-negative");
    }
    DlwStep step{state, false, 0.0};
    DlwState& s = step.state;
    s.loss_buffer.push_back(rpn_loss);
    while (s.loss_buffer.size() > cfg.window) s.loss_buffer.pop_front();
    step.running_mean = std::accumulate(s.loss_buffer.begin(), s.loss_buffer.end(), 0.0) /
                        static_cast<double>(s.loss_buffer.size());
    if (s.loss_buffer.size() == cfg.window && step.running_mean < s.tl_rpn && s.i_dlw < cfg.n_dlw) {
        s.lw_box = std::min(cfg.flw_box, s.lw_box + (cfg.flw_box - cfg.ilw_box) / cfg.n_dlw);
        s.lw_cls = std::min(cfg.flw_cls, s.lw_cls + (cfg.flw_cls - cfg.ilw_cls) / cfg.n_dlw);
        s.tl_rpn *= cfg.delta_tl_rpn;
        s.i_dlw += 1;
        step.triggered = true;
    }
    return step;
}

DlwScheduler::DlwScheduler(DlwConfig cfg) : cfg_(cfg), state_(DlwState::initial(cfg)) {}

bool DlwScheduler::observe(double rpn_loss) {
    DlwStep step = obox::observe(state_, cfg_, rpn_loss);
    state_ = std::move(step.state);
    return step.triggered;
}

}  // namespace obox
