# Tests package for bnrobot
