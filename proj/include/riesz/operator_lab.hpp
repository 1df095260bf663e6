#pragma once

#include "riesz/operator_lab/potential.hpp"
#include "riesz/operator_lab/projections.hpp"
#include "riesz/operator_lab/resolvent.hpp"
#include "riesz/operator_lab/truncated_operator.hpp"
#include "riesz/operator_lab/verification.hpp"
