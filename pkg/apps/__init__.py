# 应用包初始化文件
# 包含工具箱的全部模块
# - system: 公共基础设施（异常、文件格式、运行清单）
# - geometry: 针孔相机、位姿与投影
# - warp: 可微逆向变形与解析雅可比
# - photometric: SSIM+L1 光度误差、平滑项、图像金字塔
# - masking: 离群掩码、自动掩码、最小重投影、加权多尺度目标函数
# - scenesim: 合成场景渲染（真值深度、遮挡、运动标签）
# - optimizer: 直接优化深度与位姿
# - evaluation: 深度指标、分区域指标、ATE
# - cli: 管理命令
