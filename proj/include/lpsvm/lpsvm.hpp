#pragma once

#include "lpsvm/benchmark.hpp"
#include "lpsvm/data.hpp"
#include "lpsvm/evaluate.hpp"
#include "lpsvm/heatmap.hpp"
#include "lpsvm/psvm.hpp"
#include "lpsvm/regselect.hpp"
#include "lpsvm/sparse.hpp"
#include "lpsvm/types.hpp"
