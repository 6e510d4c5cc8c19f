#pragma once

#include "tempnet/error.hpp"
#include "tempnet/model.hpp"
#include "tempnet/network.hpp"
#include "tempnet/temporal.hpp"
#include "tempnet/solver.hpp"
#include "tempnet/io.hpp"
