#pragma once

// Reference policies used as comparison strawmen.

#include "powerdown/core.hpp"
#include "powerdown/engine.hpp"

namespace powerdown {

// Turns machine 0 on at the first arrival, runs everything EDF as it comes,
// and never powers down. Simulations need a horizon to terminate.
class AlwaysOnPolicy final : public Policy {
  public:
    std::string name() const override { return "always_on"; }

    Decisions on_arrival(const EngineView& view, int ji) override {
        Decisions out;
        if (!view.machine_on(0)) out.push_back(TurnOn{0});
        out.push_back(Assign{ji, 0});
        return out;
    }

    Decisions on_queue_empty(const EngineView&, int) override { return {}; }
    Decisions on_timer(const EngineView&, int) override { return {}; }
};

}  // namespace powerdown
