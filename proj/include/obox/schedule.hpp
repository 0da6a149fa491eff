#pragma once

#include <cstddef>
#include <deque>

namespace obox {

/// Dynamic loss-weight schedule parameters. Defaults are the Screws values;
/// use d2s() for the variant with final class weight 2.0.
struct DlwConfig {
    double ilw_box = 0.01;
    double ilw_cls = 0.01;
    double flw_box = 1.0;
    double flw_cls = 1.0;
    double i_tl_rpn = 0.5;
    double delta_tl_rpn = 0.9;
    int n_dlw = 50;
    std::size_t window = 10;

    static DlwConfig screws() { return {}; }
    static DlwConfig d2s() {
        DlwConfig c;
        c.flw_cls = 2.0;
        return c;
    }

    /// Throws ConfigError.
    void validate() const;
};

struct DlwState {
    double lw_box = 0.0;
    double lw_cls = 0.0;
    double tl_rpn = 0.0;
    int i_dlw = 0;
    std::deque<double> loss_buffer;

    static DlwState initial(const DlwConfig& cfg);
    friend bool operator==(const DlwState&, const DlwState&) = default;
};

struct DlwStep {
    DlwState state;
    bool triggered = false;
    double running_mean = 0.0;  ///< mean of the buffer after this observation
};

/// Pushes one RPN loss and applies at most one weight increase: when the buffer
/// holds `window` losses, their mean is below tl_rpn and i_dlw < n_dlw, both
/// weights step toward their final values, tl_rpn is multiplied by
/// delta_tl_rpn and i_dlw is incremented. Throws DomainError (state untouched)
/// for a negative or non-finite loss.
DlwStep observe(const DlwState& state, const DlwConfig& cfg, double rpn_loss);

/// Owning wrapper for trainers that keep one mutable schedule.
class DlwScheduler {
public:
    explicit DlwScheduler(DlwConfig cfg);

    /// Returns true when this observation triggered an update.
    bool observe(double rpn_loss);

    const DlwState& state() const { return state_; }
    const DlwConfig& config() const { return cfg_; }
    double box_weight() const { return state_.lw_box; }
    double class_weight() const { return state_.lw_cls; }

private:
    DlwConfig cfg_;
    DlwState state_;
};

}  // namespace obox
