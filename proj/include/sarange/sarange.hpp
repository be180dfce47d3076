#pragma once

// Umbrella header for the C++ interface.
#include "sarange/anneal.hpp"
#include "sarange/dataset.hpp"
#include "sarange/domain.hpp"
#include "sarange/error.hpp"
#include "sarange/objectives.hpp"
#include "sarange/range.hpp"
#include "sarange/report.hpp"
#include "sarange/resnet.hpp"
#include "sarange/trainer.hpp"
