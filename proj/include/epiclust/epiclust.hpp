#pragma once

#include <epiclust/density_peaks.hpp>
#include <epiclust/error.hpp>
#include <epiclust/estimators.hpp>
#include <epiclust/evaluation.hpp>
#include <epiclust/geometry.hpp>
#include <epiclust/io.hpp>
#include <epiclust/pipeline.hpp>
#include <epiclust/synthetic.hpp>
