#pragma once

#include "ids/adaboost.hpp"
#include "ids/config.hpp"
#include "ids/dataset.hpp"
#include "ids/entropy.hpp"
#include "ids/error.hpp"
#include "ids/flow.hpp"
#include "ids/kmeans.hpp"
#include "ids/labels.hpp"
#include "ids/matrix.hpp"
#include "ids/metrics.hpp"
#include "ids/pipeline.hpp"
#include "ids/random.hpp"
#include "ids/random_forest.hpp"
