#include "support/common.hpp"
