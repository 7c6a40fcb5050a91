# R2OMC inference engine core library
