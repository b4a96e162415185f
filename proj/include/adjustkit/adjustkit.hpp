#pragma once

#include <adjustkit/ci.hpp>
#include <adjustkit/dataset.hpp>
#include <adjustkit/distribution.hpp>
#include <adjustkit/error.hpp>
#include <adjustkit/estimators.hpp>
#include <adjustkit/experiments.hpp>
#include <adjustkit/gallery.hpp>
#include <adjustkit/io.hpp>
#include <adjustkit/parallel.hpp>
#include <adjustkit/rng.hpp>
#include <adjustkit/search.hpp>
