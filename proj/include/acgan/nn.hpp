#pragma once

#include "acgan/nn/adam.hpp"
#include "acgan/nn/grad_check.hpp"
#include "acgan/nn/graph.hpp"
#include "acgan/nn/ops_activation.hpp"
#include "acgan/nn/ops_basic.hpp"
#include "acgan/nn/ops_conv.hpp"
#include "acgan/nn/ops_linear.hpp"
#include "acgan/nn/ops_norm.hpp"
#include "acgan/nn/params.hpp"
#include "acgan/nn/tensor.hpp"
