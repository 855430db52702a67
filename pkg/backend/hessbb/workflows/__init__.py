# Analysis and comparison pipelines
