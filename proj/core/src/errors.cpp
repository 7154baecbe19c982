#include "sdyn/errors.hpp"

namespace sdyn {

StepError::StepError(const std::string& what, std::size_t step)
    : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

DivergedSimulation::DivergedSimulation(std::size_t step)
    : StepError("simulation diverged (non-finite state)", step) {}

AdjointBlowup::AdjointBlowup(std::size_t step)
    : StepError("adjoint recurrence produced a non-finite value", step) {}

OptimizerHalt::OptimizerHalt(std::size_t channel, const std::string& name)
    : std::runtime_error("non-finite gradient in channel " + std::to_string(channel) +
                         (name.empty() ? std::string() : " (" + name + ")")),
      channel_(channel) {}

}  // namespace sdyn
