#pragma once

#include "model.hpp"
#include "kernel.hpp"
#include "volterra.hpp"
#include "dynamics.hpp"
#include "entanglement.hpp"
#include "harness.hpp"
