#pragma once

#include "error.hpp"
#include "numeric_policy.hpp"
#include "operator.hpp"
#include "quadrature.hpp"
#include "time_dependent.hpp"
#include "decomposition.hpp"
#include "frame.hpp"
#include "propagators.hpp"
#include "jump.hpp"
#include "models.hpp"
