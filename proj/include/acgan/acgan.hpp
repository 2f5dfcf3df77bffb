#pragma once

#include "acgan/data/dataset.hpp"
#include "acgan/data/png.hpp"
#include "acgan/data/shapes.hpp"
#include "acgan/metrics/csv.hpp"
#include "acgan/metrics/diversity.hpp"
#include "acgan/metrics/evaluation.hpp"
#include "acgan/metrics/resize.hpp"
#include "acgan/metrics/ssim.hpp"
#include "acgan/model/checkpoint.hpp"
#include "acgan/model/classifier.hpp"
#include "acgan/model/training.hpp"
#include "acgan/nn.hpp"
