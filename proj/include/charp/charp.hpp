// Convenience umbrella for the whole library.
#pragma once

#include "charp/checks.hpp"
#include "charp/connection.hpp"
#include "charp/diffop.hpp"
#include "charp/filtration.hpp"
#include "charp/fp.hpp"
#include "charp/frobenius.hpp"
#include "charp/horizontal.hpp"
#include "charp/matrix.hpp"
#include "charp/pd.hpp"
#include "charp/poly.hpp"
#include "charp/random.hpp"
#include "charp/rees_op.hpp"
#include "charp/stratification.hpp"
#include "charp/theta.hpp"
